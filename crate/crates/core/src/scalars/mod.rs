//! Values, base fields with their valuations, residue towers and factorization.

mod bivariate;
mod factor;
mod field;
mod group;
mod tower;
mod valued;
mod value;

pub use bivariate::{BiPoly, BiRat, MonomialField};
pub use factor::{factor_residual, is_irreducible, recombine, Factorization, RATIONAL_DEGREE_BOUND};
pub use field::{int_val, is_p_power, is_prime, p_val, Field, PrimeField, Rationals, ResidueBase};
pub use group::{group_index, ValueGroup};
pub use tower::{ResiduePoly, TElem, TowerField};
pub use valued::{FieldDescriptor, FpT, PAdic, RatFn, TAdic, ValuedField, QT};
pub use value::{json_rational, parse_rational, rational_json, rational_text, Value};
