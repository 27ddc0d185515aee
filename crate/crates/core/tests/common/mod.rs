//! Random generators shared by the integration tests.
#![allow(dead_code)]

use heightlab::arith::Rational;
use heightlab::funcfield::{Poly, RationalFunction};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn nonzero(rng: &mut ChaCha8Rng, bound: i64) -> i64 {
    loop {
        let v = rng.gen_range(-bound..=bound);
        if v != 0 {
            return v;
        }
    }
}

/// A linear or quadratic integer polynomial with coefficients in [-bound, bound].
pub fn random_factor(rng: &mut ChaCha8Rng, bound: i64) -> Poly {
    if rng.gen_bool(0.5) {
        Poly::from_i64(&[rng.gen_range(-bound..=bound), nonzero(rng, bound)])
    } else {
        Poly::from_i64(&[rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound), nonzero(rng, bound)])
    }
}

/// `c · Π num factors / Π den factors`, up to two factors on each side.
pub fn random_function(rng: &mut ChaCha8Rng, bound: i64) -> RationalFunction {
    let mut num = Poly::constant(Rational::new(nonzero(rng, bound).into(), rng.gen_range(1..=bound).into()));
    let mut den = Poly::one();
    for _ in 0..rng.gen_range(0..=2) {
        num = &num * &random_factor(rng, bound);
    }
    for _ in 0..rng.gen_range(0..=2) {
        den = &den * &random_factor(rng, bound);
    }
    RationalFunction::new(num, den).expect("nonzero denominator")
}

/// A nonconstant function: at least one factor somewhere.
pub fn random_nonconstant(rng: &mut ChaCha8Rng, bound: i64) -> RationalFunction {
    loop {
        let f = random_function(rng, bound);
        if !f.is_constant() {
            return f;
        }
    }
}

use heightlab::klm::{pair_m1_real, Form, FormProduct, Gauss, K1Precycle, KlmError, Orientation, PairOptions, SymbolPair};

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(nonzero(rng, 9).into(), rng.gen_range(1..=5i64).into())
}

/// Triangle of random rational lines with `g_j = κ_j ℓ_{j+1}/ℓ_{j+2}` on `ℓ_j`.
pub fn random_triangle_cycle(rng: &mut ChaCha8Rng) -> K1Precycle {
    loop {
        let forms: Vec<[i64; 3]> = (0..3).map(|_| [0; 3].map(|_| rng.gen_range(-4..=4))).collect();
        let det = forms[0][0] * (forms[1][1] * forms[2][2] - forms[1][2] * forms[2][1])
            - forms[0][1] * (forms[1][0] * forms[2][2] - forms[1][2] * forms[2][0])
            + forms[0][2] * (forms[1][0] * forms[2][1] - forms[1][1] * forms[2][0]);
        if det == 0 {
            continue;
        }
        let g = |v: [i64; 3]| v.map(|x| Gauss::from_i64(x, 0));
        let lines: Vec<Form> = forms.iter().map(|f| Form::new(g(*f)).unwrap()).collect();
        let terms = (0..3)
            .map(|j| {
                let gj = FormProduct::constant(Gauss::real(small_rational(rng)))
                    .times(g(forms[(j + 1) % 3]), 1)
                    .unwrap()
                    .times(g(forms[(j + 2) % 3]), -1)
                    .unwrap();
                (gj, lines[j].clone())
            })
            .collect();
        return K1Precycle::new(terms).unwrap();
    }
}

fn random_gauss_form(rng: &mut ChaCha8Rng) -> [Gauss; 3] {
    loop {
        let v = [0; 3].map(|_| Gauss::from_i64(rng.gen_range(-4..=4), rng.gen_range(-2..=2)));
        if v.iter().any(|x| !x.is_zero()) {
            return v;
        }
    }
}

/// `c · ℓ_a / ℓ_b` with Gaussian-integer forms.
pub fn random_ratio(rng: &mut ChaCha8Rng) -> FormProduct {
    FormProduct::constant(Gauss::real(small_rational(rng)))
        .times(random_gauss_form(rng), 1)
        .unwrap()
        .times(random_gauss_form(rng), -1)
        .unwrap()
}

pub fn native_opts(tol: f64) -> PairOptions {
    let mut o = PairOptions { orientation: Orientation::Native, ..PairOptions::default() };
    o.quad.tol = tol;
    o
}

/// A cycle with `{f1, f2}`, `{f1, f2'}` and `{f1, f2 f2'}` all admissible,
/// returned with the three pairing values.
pub fn random_bilinearity_config(rng: &mut ChaCha8Rng, tol: f64) -> (K1Precycle, [f64; 3]) {
    let opts = native_opts(tol);
    loop {
        let xi = random_triangle_cycle(rng);
        let f1 = random_ratio(rng);
        let f2 = random_ratio(rng);
        let f2b = random_ratio(rng);
        let pairs = [
            SymbolPair::new(f1.clone(), f2.clone()).unwrap(),
            SymbolPair::new(f1.clone(), f2b.clone()).unwrap(),
            SymbolPair::new(f1.clone(), f2.mul(&f2b)).unwrap(),
        ];
        let vals: Result<Vec<f64>, KlmError> =
            pairs.iter().map(|sp| pair_m1_real(&xi, sp, &opts).map(|v| v.value)).collect();
        match vals {
            Ok(v) => return (xi, [v[0], v[1], v[2]]),
            Err(KlmError::GeneralPositionFailure(_)) | Err(KlmError::SingularityOnPath(_)) => continue,
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
