//! Height-pairing computations on curves, surfaces and number rings.
//!
//! * [`funcfield`]: Q(t), places of P¹, tame symbols, Weil reciprocity.
//! * [`arch_pairing`]: the m = 0 Archimedean pairing with exact values.
//! * [`klm`]: the m = 1 real regulator pairing along a closed contour.
//! * [`neron_tate`]: canonical heights and the graded height pairing on
//!   products of curves.
//! * [`arakelov`]: Arakelov divisors on quadratic number rings.
//! * [`spreads`]: spreading defining equations with transcendental constants.

pub mod arith;
pub mod funcfield;
pub mod arch_pairing;
pub mod klm;
pub mod quadrature;
pub mod neron_tate;
pub mod arakelov;
pub mod spreads;
