//! Key-polynomial chains, standard expansions, truncations and Newton polygons.

use num_traits::ToPrimitive;
use serde_json::json;

use crate::error::{Error, Result};
use crate::graded::Mono;
use crate::poly::{Poly, PolyOps};
use crate::scalars::{is_irreducible, Field, ResiduePoly, TElem, TowerField, Value, ValueGroup, ValuedField, RATIONAL_DEGREE_BOUND};

pub type KPoly<F> = Poly<<F as Field>::Elem>;
pub type RElem<F> = TElem<<<F as ValuedField>::Res as Field>::Elem>;
pub type RPoly<F> = ResiduePoly<<<F as ValuedField>::Res as Field>::Elem>;

#[derive(Clone, Debug, PartialEq)]
pub struct Entry<E> {
    pub q: Poly<E>,
    pub beta: Value,
    pub alpha: usize,
}

/// A finite chain `Q₀ = x, Q₁, …` with values, plus the residue data needed for
/// initial forms. Levels are 0-based here; the CLI numbers them from 1.
#[derive(Clone, Debug)]
pub struct KeyChain<F: ValuedField> {
    pub(crate) field: F,
    pub(crate) entries: Vec<Entry<F::Elem>>,
    /// `groups[i]` is generated by ν(K*) and β_0, …, β_{i−1}.
    pub(crate) groups: Vec<ValueGroup>,
    /// Order of β_i modulo `groups[i]`.
    pub(crate) abar: Vec<usize>,
    /// Canonical monomial of value `abar[i]·β_i` in the levels below i.
    pub(crate) ywit: Vec<Mono>,
    pub(crate) tower: TowerField<F::Res>,
    /// Tower depth of the residue field k_i.
    pub(crate) tdepth: Vec<usize>,
    pub(crate) lambda: Vec<RPoly<F>>,
    /// Class of `Q̄_i^abar / y_i` in k_{i+1}.
    pub(crate) zgen: Vec<RElem<F>>,
    pub(crate) limit: Option<(KPoly<F>, Value)>,
    pub(crate) rational_bound: usize,
}

pub(crate) fn small_index(g: &ValueGroup, beta: &Value) -> Result<usize> {
    g.index_of(beta)
        .and_then(|n| n.to_usize())
        .ok_or_else(|| Error::NotInGroup(beta.clone()))
}

impl<F: ValuedField> KeyChain<F> {
    /// The one-entry chain `[x @ β₀]`.
    pub fn start(field: F, beta0: Value) -> Result<Self> {
        if beta0 <= Value::zero() {
            return Err(Error::NonPositiveValueOfX(beta0));
        }
        let g0 = ValueGroup::generated_by(field.value_group_gens().iter());
        let tower = TowerField::new(field.residue_field());
        let mut chain = KeyChain {
            entries: vec![Entry { q: field.px(), beta: beta0.clone(), alpha: 1 }],
            groups: vec![g0],
            abar: Vec::new(),
            ywit: Vec::new(),
            tower,
            tdepth: vec![0],
            lambda: Vec::new(),
            zgen: Vec::new(),
            limit: None,
            rational_bound: RATIONAL_DEGREE_BOUND,
            field,
        };
        chain.close_level()?;
        Ok(chain)
    }

    /// Builds a chain from `(Q, β)` pairs, validating every step.
    pub fn from_entries(field: F, entries: Vec<(KPoly<F>, Value)>) -> Result<Self> {
        let mut it = entries.into_iter();
        let (q0, b0) = it.next().ok_or_else(|| Error::InvalidChain("empty chain".into()))?;
        if q0 != field.px() {
            return Err(Error::InvalidChain("the first key polynomial must be x".into()));
        }
        let mut chain = KeyChain::start(field, b0)?;
        for (q, b) in it {
            chain = chain.push(q, b)?;
        }
        Ok(chain)
    }

    pub fn with_rational_bound(mut self, bound: usize) -> Self {
        self.rational_bound = bound;
        self
    }

    pub fn with_limit(mut self, q: KPoly<F>, beta: Value) -> Self {
        self.limit = Some((q, beta));
        self
    }

    // Group, index and witness for the level just appended.
    fn close_level(&mut self) -> Result<()> {
        let i = self.entries.len() - 1;
        let beta = self.entries[i].beta.clone();
        if beta.is_infinite() {
            return Ok(());
        }
        let a = small_index(&self.groups[i], &beta)?;
        self.abar.push(a);
        self.groups.push(self.groups[i].with(&beta));
        let y = self.canon(i, &beta.mul_int(a as i64))?;
        self.ywit.push(y);
        Ok(())
    }

    /// Appends `Q` with value `β`, checking that `Q` is a key polynomial over
    /// the current top truncation.
    pub fn push(&self, q: KPoly<F>, beta: Value) -> Result<Self> {
        let l = self.top();
        let bl = self.entries[l].beta.clone();
        if bl.is_infinite() {
            return Err(Error::InvalidChain("cannot extend past an infinite value".into()));
        }
        if !self.field.is_monic(&q) {
            return Err(Error::InvalidChain("key polynomials are monic".into()));
        }
        let (dq, dl) = (q.deg(), self.entries[l].q.deg());
        if dq < dl || dq % dl != 0 {
            return Err(Error::InvalidChain(format!("degree {dq} is not a multiple of {dl}")));
        }
        let alpha = dq / dl;
        let abar = self.abar[l];
        if alpha % abar != 0 {
            return Err(Error::InvalidChain(format!("step {alpha} is not a multiple of the index {abar}")));
        }
        let d = alpha / abar;
        let ex = self.expand_residual(l, &q)?;
        let base_val = bl.mul_int(alpha as i64);
        let k = self.residue_field(l);
        let r = k.poly(ex.coeffs.clone());
        if ex.shift != 0 || ex.value != base_val || r.deg() != d || k.is_zero(&ex.coeffs[0]) {
            return Err(Error::InvalidChain(format!("{} is not a key polynomial over the top truncation", self.field.pshow(&q, "x"))));
        }
        let lambda = k.pmake_monic(&r);
        if !is_irreducible(&k, &lambda, self.rational_bound)? {
            return Err(Error::NotIrreducible);
        }
        if beta <= base_val {
            return Err(Error::InvalidChain(format!("value {beta} does not exceed the truncation value {base_val}")));
        }
        let mut next = self.clone();
        let (z, depth) = if d >= 2 {
            next.tower = k.extend(lambda.clone())?;
            (next.tower.generator(), self.tdepth[l] + 1)
        } else {
            (k.neg(&lambda.coeffs()[0]), self.tdepth[l])
        };
        next.entries.push(Entry { q, beta, alpha });
        next.lambda.push(lambda);
        next.zgen.push(z);
        next.tdepth.push(depth);
        next.close_level()?;
        Ok(next)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn top(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn entries(&self) -> &[Entry<F::Elem>] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> Result<&Entry<F::Elem>> {
        self.entries.get(i).ok_or(Error::NoSuchLevel(i))
    }

    pub fn q(&self, i: usize) -> &KPoly<F> {
        &self.entries[i].q
    }

    pub fn beta(&self, i: usize) -> &Value {
        &self.entries[i].beta
    }

    pub fn alpha(&self, i: usize) -> usize {
        self.entries[i].alpha
    }

    /// Index of β_i over the group of the lower levels (finite β only).
    pub fn abar(&self, i: usize) -> usize {
        self.abar[i]
    }

    pub fn group(&self, i: usize) -> &ValueGroup {
        &self.groups[i]
    }

    pub fn lambda(&self, i: usize) -> &RPoly<F> {
        &self.lambda[i]
    }

    pub fn limit(&self) -> Option<&(KPoly<F>, Value)> {
        self.limit.as_ref()
    }

    pub fn rational_bound(&self) -> usize {
        self.rational_bound
    }

    /// The residue field k_i over which level-i residual polynomials live.
    pub fn residue_field(&self, i: usize) -> TowerField<F::Res> {
        self.tower.level(self.tdepth[i])
    }

    pub fn tower_depth(&self, i: usize) -> usize {
        self.tdepth[i]
    }

    /// The chain truncated to levels `0..=i`.
    pub fn prefix(&self, i: usize) -> Self {
        let mut c = self.clone();
        c.entries.truncate(i + 1);
        c.tdepth.truncate(i + 1);
        c.lambda.truncate(i);
        c.zgen.truncate(i);
        let fin = c.entries.iter().filter(|e| e.beta.is_finite()).count();
        c.abar.truncate(fin);
        c.ywit.truncate(fin);
        c.groups.truncate(fin + 1);
        c.tower = c.tower.level(c.tdepth[i]).truncated();
        c.limit = None;
        c
    }

    /// Iterated division by Q_i: `h = Σ d_j Q_i^j` with `deg d_j < deg Q_i`.
    pub fn standard_expansion(&self, h: &KPoly<F>, i: usize) -> Result<Vec<KPoly<F>>> {
        expand_in(&self.field, h, &self.entries[i].q)
    }

    /// ν′ of a coefficient of a level-i expansion, through level i−1.
    pub fn coefficient_value(&self, d: &KPoly<F>, i: usize) -> Value {
        if i == 0 {
            self.field.val(&self.field.coeff_or_zero(d, 0))
        } else {
            self.truncation_value(d, i - 1)
        }
    }

    /// ν_i(h).
    pub fn truncation_value(&self, h: &KPoly<F>, i: usize) -> Value {
        if h.is_zero() {
            return Value::Infinity;
        }
        if h.deg() == 0 {
            return self.field.val(&h.coeffs()[0]);
        }
        let l = (0..=i).rev().find(|&l| self.entries[l].q.deg() <= h.deg()).unwrap_or(0);
        let ds = self.standard_expansion(h, l).expect("key polynomials are monic");
        let beta = &self.entries[l].beta;
        ds.iter()
            .enumerate()
            .filter(|(_, d)| !d.is_zero())
            .map(|(j, d)| beta.mul_int(j as i64).add(&self.coefficient_value(d, l)))
            .min()
            .unwrap_or(Value::Infinity)
    }

    /// ν_top(h), or the limit value when a limit marker is present.
    pub fn value(&self, h: &KPoly<F>) -> Value {
        match &self.limit {
            None => self.truncation_value(h, self.top()),
            Some((q, b)) => {
                let ds = expand_in(&self.field, h, q).expect("limit polynomial is monic");
                ds.iter()
                    .enumerate()
                    .filter(|(_, d)| !d.is_zero())
                    .map(|(j, d)| b.mul_int(j as i64).add(&self.truncation_value(d, self.top())))
                    .min()
                    .unwrap_or(Value::Infinity)
            }
        }
    }

    /// `{j : jβ + ν′(d_j)` minimal`}` for the level-i expansion.
    pub fn support_set(&self, h: &KPoly<F>, i: usize, beta: &Value) -> Result<Vec<usize>> {
        if h.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let ds = self.standard_expansion(h, i)?;
        let vals: Vec<(usize, Value)> = ds
            .iter()
            .enumerate()
            .filter(|(_, d)| !d.is_zero())
            .map(|(j, d)| (j, beta.mul_int(j as i64).add(&self.coefficient_value(d, i))))
            .collect();
        let m = vals.iter().map(|(_, v)| v.clone()).min().expect("h is nonzero");
        Ok(vals.into_iter().filter(|(_, v)| *v == m).map(|(j, _)| j).collect())
    }

    pub fn determines_side(&self, h: &KPoly<F>, i: usize, beta: &Value) -> Result<bool> {
        Ok(self.support_set(h, i, beta)?.len() >= 2)
    }

    pub fn newton_polygon(&self, h: &KPoly<F>, i: usize) -> Result<NewtonPolygon> {
        if h.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let points: Vec<(usize, Value)> = self
            .standard_expansion(h, i)?
            .iter()
            .enumerate()
            .filter(|(_, d)| !d.is_zero())
            .map(|(j, d)| (j, self.coefficient_value(d, i)))
            .collect();
        Ok(NewtonPolygon::from_points(points))
    }

    /// Chain dump: one object per level.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<_> = self
            .entries
            .iter()
            .map(|e| json!({"Q": self.field.encode_poly(&e.q), "beta": e.beta.to_json(), "alpha": e.alpha}))
            .collect();
        let mut out = json!({"field": self.field.descriptor().to_json(), "chain": entries});
        if let Some((q, b)) = &self.limit {
            out["limit"] = json!({"Q": self.field.encode_poly(q), "beta": b.to_json()});
        }
        out
    }

    /// Reads a chain dump. `v` is either the object written by [`to_json`]
    /// or a bare entry list.
    pub fn from_json(field: F, v: &serde_json::Value) -> Result<Self> {
        let list = match v {
            serde_json::Value::Array(_) => v,
            _ => v.get("chain").ok_or_else(|| Error::Json("chain file needs a \"chain\" list".into()))?,
        };
        let list = list.as_array().ok_or_else(|| Error::Json("chain must be a list".into()))?;
        let mut entries = Vec::new();
        for e in list {
            let q = field.decode_poly(e.get("Q").ok_or_else(|| Error::Json("chain entry needs Q".into()))?)?;
            let b = Value::from_json(e.get("beta").ok_or_else(|| Error::Json("chain entry needs beta".into()))?)?;
            entries.push((q, b));
        }
        let mut chain = KeyChain::from_entries(field.clone(), entries)?;
        if let Some(lim) = v.get("limit").filter(|l| !l.is_null()) {
            let q = field.decode_poly(lim.get("Q").ok_or_else(|| Error::Json("limit needs Q".into()))?)?;
            let b = Value::from_json(lim.get("beta").ok_or_else(|| Error::Json("limit needs beta".into()))?)?;
            chain = chain.with_limit(q, b);
        }
        Ok(chain)
    }
}

pub(crate) fn expand_in<K: PolyOps>(k: &K, h: &Poly<K::Elem>, q: &Poly<K::Elem>) -> Result<Vec<Poly<K::Elem>>> {
    let mut out = Vec::new();
    let mut rest = h.clone();
    while !rest.is_zero() {
        let (quo, rem) = k.euclid_div(&rest, q)?;
        out.push(rem);
        rest = quo;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Side {
    pub slope: Value,
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub points: Vec<(usize, Value)>,
    /// Hull vertices, as indices j.
    pub hull: Vec<usize>,
    pub sides: Vec<Side>,
}

impl NewtonPolygon {
    /// Lower convex hull of points sorted by j.
    pub fn from_points(points: Vec<(usize, Value)>) -> Self {
        let slope = |a: &(usize, Value), b: &(usize, Value)| b.1.sub(&a.1).div_int((b.0 - a.0) as i64);
        let mut hull: Vec<&(usize, Value)> = Vec::new();
        for p in &points {
            while hull.len() >= 2 && slope(hull[hull.len() - 2], hull[hull.len() - 1]) >= slope(hull[hull.len() - 1], p) {
                hull.pop();
            }
            hull.push(p);
        }
        let sides = hull
            .windows(2)
            .map(|w| Side { slope: slope(w[0], w[1]), from: w[0].0, to: w[1].0 })
            .collect();
        let hull = hull.iter().map(|p| p.0).collect();
        NewtonPolygon { points, hull, sides }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "points": self.points.iter().map(|(j, v)| json!([j, v.to_json()])).collect::<Vec<_>>(),
            "hull": self.hull,
            "sides": self.sides.iter().map(|s| json!({"slope": s.slope.to_json(), "from": s.from, "to": s.to})).collect::<Vec<_>>(),
        })
    }

    /// A plain SVG plot: index to the right, value upwards.
    pub fn to_svg(&self) -> String {
        let (w, h, pad) = (400.0, 300.0, 30.0);
        let jmax = self.points.iter().map(|p| p.0).max().unwrap_or(0).max(1) as f64;
        let vs: Vec<f64> = self.points.iter().map(|p| p.1.to_f64()).collect();
        let vmin = vs.iter().cloned().fold(0.0, f64::min);
        let vmax = vs.iter().cloned().fold(1.0, f64::max);
        let px = |j: usize| pad + (w - 2.0 * pad) * j as f64 / jmax;
        let py = |v: f64| h - pad - (h - 2.0 * pad) * (v - vmin) / (vmax - vmin).max(1e-9);
        let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n");
        s += &format!(
            "<line x1=\"{pad}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"black\"/>\n<line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{y}\" stroke=\"black\"/>\n",
            y = h - pad,
            x2 = w - pad
        );
        let on_hull: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| self.hull.contains(&p.0))
            .map(|p| (px(p.0), py(p.1.to_f64())))
            .collect();
        if on_hull.len() >= 2 {
            let pts: Vec<String> = on_hull.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            s += &format!("<polyline points=\"{}\" fill=\"none\" stroke=\"blue\"/>\n", pts.join(" "));
        }
        for (j, v) in &self.points {
            s += &format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\"><title>({j}, {v})</title></circle>\n",
                px(*j),
                py(v.to_f64())
            );
        }
        s += "</svg>\n";
        s
    }
}
