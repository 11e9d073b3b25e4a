//! Static SVG drawing of Newton polygons. Coordinates come from a 12-digit
//! decimal rendering of the exact values and are for display only.

use keypoly::chain::NewtonPolygon;
use keypoly::scalars::Value;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

const DIGITS: usize = 12;

/// `q` rounded to 12 fractional digits, half away from zero.
pub fn decimal(q: &BigRational) -> String {
    let scale = BigInt::from(10).pow(DIGITS as u32);
    let scaled = q.abs() * BigRational::from_integer(scale.clone());
    let (n, r) = scaled.numer().div_rem(scaled.denom());
    let n = if r * 2 >= *scaled.denom() { n + 1 } else { n };
    let (int, frac) = n.div_rem(&scale);
    let sign = if q.is_negative() && !(int.is_zero() && frac.is_zero()) { "-" } else { "" };
    format!("{sign}{int}.{frac:0>DIGITS$}")
}

/// Decimal text for a finite value; `a + b√2` goes through f64.
pub fn value_decimal(v: &Value) -> Option<String> {
    match v.as_rational() {
        Some(q) => Some(decimal(q)),
        None if v.is_finite() => Some(format!("{:.DIGITS$}", v.to_f64())),
        None => None,
    }
}

pub fn newton_svg(np: &NewtonPolygon) -> String {
    let (w, h, pad) = (480.0, 360.0, 40.0);
    let pts: Vec<(usize, f64, String)> = np
        .points
        .iter()
        .filter_map(|(j, v)| value_decimal(v).map(|d| (*j, d.parse::<f64>().unwrap(), d)))
        .collect();
    let jmax = pts.iter().map(|p| p.0).max().unwrap_or(0).max(1) as f64;
    let vmin = pts.iter().map(|p| p.1).fold(0.0, f64::min);
    let vmax = pts.iter().map(|p| p.1).fold(1.0, f64::max);
    let px = |j: usize| pad + (w - 2.0 * pad) * j as f64 / jmax;
    let py = |v: f64| h - pad - (h - 2.0 * pad) * (v - vmin) / (vmax - vmin);
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n");
    s += "<!-- display only: coordinates are 12-digit decimal renderings of exact values -->\n";
    s += &format!("<text x=\"{pad}\" y=\"20\" font-size=\"12\">Newton polygon (display only)</text>\n");
    s += &format!(
        "<line x1=\"{pad}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"black\"/>\n<line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{y}\" stroke=\"black\"/>\n",
        y = h - pad,
        x2 = w - pad
    );
    let hull: Vec<String> = pts
        .iter()
        .filter(|p| np.hull.contains(&p.0))
        .map(|p| format!("{:.3},{:.3}", px(p.0), py(p.1)))
        .collect();
    if hull.len() >= 2 {
        s += &format!("<polyline points=\"{}\" fill=\"none\" stroke=\"blue\"/>\n", hull.join(" "));
    }
    for (j, v, d) in &pts {
        s += &format!("<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\"><title>j={j} value={d}</title></circle>\n", px(*j), py(*v));
    }
    s += "</svg>\n";
    s
}
