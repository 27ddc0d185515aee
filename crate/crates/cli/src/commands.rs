use std::f64::consts::TAU;

use heightlab::arakelov::{self, Field, FieldElement};
use heightlab::arch_pairing::{boundary, pair_m0, reciprocity_check, Precycle0, ZeroCycle};
use heightlab::arith::{format_rational, parse_rational};
use heightlab::funcfield::{residue_norm, tame_symbol, weil_factors, Divisor, Place, RationalFunction};
use heightlab::klm::{
    build_gamma, chart_function, contour_darg, pair_m1_real, paper_configuration, simplex_cycle, winding_number,
    FormProduct, Gauss, K1Precycle, PairOptions, SymbolPair,
};
use heightlab::neron_tate::{
    canonical_height, graded_height_ex5, naive_height, nt_pairing, EllipticCurveQ, HeightOptions,
};
use heightlab::quadrature::QuadOptions;
use heightlab::spreads::{self, ConstSymbol, PiMode, SpreadOptions};
use serde_json::{json, Value};

use crate::{input, CliError, Command, CurveArgs, Env, NumericArgs, Report, DEFAULT_TOL};

/// Fallback tolerance for canonical heights; 1e-9 would need more doublings
/// than the default cap allows for most curves.
const DEFAULT_HEIGHT_TOL: f64 = 1e-6;

pub fn dispatch(c: &Command, env: &Env) -> Result<Report, CliError> {
    match c {
        Command::Tame { f, g, at } => tame(f, g, at),
        Command::Weil { f, g } => weil(f, g),
        Command::Pair0(a) => pair0(a.f.as_deref(), a.xi2.as_deref(), a.input.as_deref()),
        Command::Recip0(a) => recip0(a.f.as_deref(), a.g.as_deref(), a.input.as_deref()),
        Command::Pair1(a) => pair1(a, env),
        Command::Winding(a) => winding(a, env),
        Command::Ntheight { curve, point } => ntheight(curve, point, env),
        Command::Ntpair { curve, p, q } => ntpair(curve, p, q, env),
        Command::Ex5 { curve, p1, q1, p2, q2, genera } => ex5(curve, [p1, q1, p2, q2], genera, env),
        Command::Arakelov { d, alpha } => arakelov(*d, alpha),
        Command::Spread(a) => spread(a),
    }
}

fn read_json(path: &str) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {}", path, e)))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: invalid JSON: {}", path, e)))
}

fn required<'a>(v: Option<&'a str>, flag: &str) -> Result<&'a str, CliError> {
    v.ok_or_else(|| CliError::usage(format!("{} is required without --input", flag)))
}

fn tame(f: &str, g: &str, at: &str) -> Result<Report, CliError> {
    let fr = RationalFunction::parse(f)?;
    let gr = RationalFunction::parse(g)?;
    let place = Place::parse(at)?;
    let symbol = tame_symbol(&fr, &gr, &place)?;
    let norm = residue_norm(&symbol);
    let mut r = Report::default();
    r.input("f", fr.to_string());
    r.input("g", gr.to_string());
    r.input("at", place.to_string());
    r.result("symbol", symbol.to_string());
    r.result("norm", format_rational(&norm));
    r.line(symbol.to_string());
    if place.degree() > 1 {
        r.line(format!("norm {}", format_rational(&norm)));
    }
    Ok(r)
}

fn weil(f: &str, g: &str) -> Result<Report, CliError> {
    let fr = RationalFunction::parse(f)?;
    let gr = RationalFunction::parse(g)?;
    let factors = weil_factors(&fr, &gr)?;
    let product = factors.iter().fold(num_one(), |acc, s| acc * &s.norm);
    let mut r = Report::default();
    r.input("f", fr.to_string());
    r.input("g", gr.to_string());
    r.result("product", format_rational(&product));
    r.line(format!("product {}", format_rational(&product)));
    for s in &factors {
        r.terms.push(json!({
            "place": s.place.to_string(),
            "symbol": s.symbol.to_string(),
            "norm": format_rational(&s.norm),
        }));
        r.line(format!("  {}  symbol {}  norm {}", s.place, s.symbol, format_rational(&s.norm)));
    }
    Ok(r)
}

fn num_one() -> heightlab::arith::Rational {
    heightlab::arith::int(1)
}

fn precycle_text(x: &Precycle0) -> Value {
    Value::Array(x.terms.iter().map(|(f, z)| json!({"f": f.to_string(), "support": z.to_string()})).collect())
}

fn pair0(f: Option<&str>, xi2: Option<&str>, path: Option<&str>) -> Result<Report, CliError> {
    let (xi1, cycle): (Precycle0, ZeroCycle) = match path {
        Some(p) => {
            let v = read_json(p)?;
            let xi1 = input::precycle0(v.get("xi1").ok_or_else(|| CliError::usage("missing 'xi1'"))?)?;
            let xi2 = input::zero_cycle(v.get("xi2").ok_or_else(|| CliError::usage("missing 'xi2'"))?)?;
            (xi1, xi2)
        }
        None => {
            let f = RationalFunction::parse(required(f, "--f")?)?;
            let d = Divisor::parse(required(xi2, "--xi2")?)?;
            (Precycle0::on_p1(f), ZeroCycle::from_divisor(&d))
        }
    };
    let value = pair_m0(&xi1, &cycle)?;
    let mut r = Report::default();
    r.input("xi1", precycle_text(&xi1));
    r.input("xi2", cycle.to_string());
    r.result("boundary_xi1", boundary(&xi1)?.to_string());
    r.result("ratio", format_rational(&value.ratio));
    r.result("value", value.value());
    r.line(format!("{} = {}", value, value.value()));
    Ok(r)
}

fn recip0(f: Option<&str>, g: Option<&str>, path: Option<&str>) -> Result<Report, CliError> {
    let (x1, x2) = match path {
        Some(p) => {
            let v = read_json(p)?;
            let get = |k: &str| -> Result<Precycle0, CliError> {
                input::precycle0(v.get(k).ok_or_else(|| CliError::usage(format!("missing '{}'", k)))?)
            };
            (get("xi1")?, get("xi2")?)
        }
        None => (
            Precycle0::on_p1(RationalFunction::parse(required(f, "--f")?)?),
            Precycle0::on_p1(RationalFunction::parse(required(g, "--g")?)?),
        ),
    };
    let (lhs, rhs) = reciprocity_check(&x1, &x2)?;
    let mut r = Report::default();
    r.input("xi1", precycle_text(&x1));
    r.input("xi2", precycle_text(&x2));
    r.result("lhs", format_rational(&lhs.ratio));
    r.result("rhs", format_rational(&rhs.ratio));
    r.result("equal", lhs == rhs);
    r.line(format!("<d xi1, d xi2> = {}", lhs));
    r.line(format!("<d xi2, d xi1> = {}", rhs));
    r.line(format!("equal {}", lhs == rhs));
    Ok(r)
}

fn pair_options(n: &NumericArgs, env: &Env) -> Result<PairOptions, CliError> {
    let tol = env.tolerance(n.tol, DEFAULT_TOL)?;
    if !(n.guard > 0.0 && n.guard < 1.0) {
        return Err(CliError::usage(format!("guard {} outside (0, 1)", n.guard)));
    }
    Ok(PairOptions {
        quad: QuadOptions { tol, ..QuadOptions::default() },
        guard: n.guard,
        orientation: n.orientation.parse().map_err(|_| CliError::usage(format!("unknown orientation '{}'", n.orientation)))?,
    })
}

fn check_example(name: &str) -> Result<(), CliError> {
    if name == "paper" {
        Ok(())
    } else {
        Err(CliError::usage(format!("unknown example '{}' (expected 'paper')", name)))
    }
}

fn parse_gauss(s: &str) -> Result<Gauss, CliError> {
    Ok(s.parse()?)
}

fn pair1(a: &crate::Pair1Args, env: &Env) -> Result<Report, CliError> {
    let opts = pair_options(&a.numeric, env)?;
    let mut r = Report::default();
    let (xi, sp): (K1Precycle, SymbolPair) = match (&a.example, &a.input) {
        (Some(name), _) => {
            check_example(name)?;
            let f1 = parse_rational(&a.f1).ok_or_else(|| CliError::usage(format!("--f1 '{}' is not rational", a.f1)))?;
            let p = parse_gauss(&a.p)?;
            r.input("example", name.as_str());
            r.input("f1", format_rational(&f1));
            r.input("p", p.to_string());
            paper_configuration(&f1, &p)?
        }
        (None, Some(path)) => {
            let v = read_json(path)?;
            let get = |k: &str| v.get(k).ok_or_else(|| CliError::usage(format!("missing '{}'", k)));
            let xi = input::k1_precycle(get("xi")?)?;
            let sp = SymbolPair::new(input::form_product(get("f1")?)?, input::form_product(get("f2")?)?)?;
            (xi, sp)
        }
        (None, None) => return Err(CliError::usage("pair1 needs --example or --input")),
    };
    r.input("xi", k1_text(&xi));
    r.input("f1_function", sp.f1.to_string());
    r.input("f2_function", sp.f2.to_string());
    r.input("tol", opts.quad.tol);
    r.input("orientation", a.numeric.orientation.as_str());
    let value = pair_m1_real(&xi, &sp, &opts)?;
    let contour = build_gamma(&xi)?;
    r.result("value", value.value);
    r.result("orientation_sign", value.orientation_sign);
    r.line(format!("value {}", value.value));
    for (arc, v) in contour.arcs.iter().zip(&value.arcs) {
        r.terms.push(json!({
            "line": arc.line.to_string(),
            "start": arc.start.to_string(),
            "end": arc.end.to_string(),
            "value": v,
        }));
        r.line(format!("  arc on {}: {} -> {}  {}", arc.line, arc.start, arc.end, v));
    }
    if a.example.is_some() && sp.f1.is_constant() {
        // −2π·log|f₁| times the change of arg f₂ along γ
        let w = winding_number(&sp.f2, &contour, &opts)?;
        let log_f1 = sp.f1.constant_factor().to_complex().norm().ln();
        let closed = -TAU * log_f1 * TAU * w as f64;
        r.result("winding_f2", w);
        r.result("closed_form", closed);
        r.line(format!("winding of f2 {}, closed form {}", w, closed));
    }
    Ok(r)
}

fn k1_text(xi: &K1Precycle) -> Value {
    Value::Array(xi.terms.iter().map(|(g, d)| json!({"g": g.to_string(), "line": d.to_string()})).collect())
}

fn winding(a: &crate::WindingArgs, env: &Env) -> Result<Report, CliError> {
    let opts = pair_options(&a.numeric, env)?;
    let mut r = Report::default();
    let (xi, f): (K1Precycle, FormProduct) = match (&a.example, &a.input) {
        (Some(name), _) => {
            check_example(name)?;
            let p = parse_gauss(&a.p)?;
            r.input("example", name.as_str());
            r.input("p", p.to_string());
            (simplex_cycle(), chart_function(&p))
        }
        (None, Some(path)) => {
            let v = read_json(path)?;
            let get = |k: &str| v.get(k).ok_or_else(|| CliError::usage(format!("missing '{}'", k)));
            (input::k1_precycle(get("xi")?)?, input::form_product(get("f")?)?)
        }
        (None, None) => return Err(CliError::usage("winding needs --example or --input")),
    };
    r.input("xi", k1_text(&xi));
    r.input("f", f.to_string());
    r.input("tol", opts.quad.tol);
    let contour = build_gamma(&xi)?;
    let n = winding_number(&f, &contour, &opts)?;
    let darg = contour_darg(&f, &contour, &opts)?;
    r.result("winding_number", n);
    r.result("darg", darg);
    r.line(format!("winding number {}", n));
    r.line(format!("total change of arg {}", darg));
    Ok(r)
}

fn height_setup(c: &CurveArgs, env: &Env, r: &mut Report) -> Result<(EllipticCurveQ, HeightOptions), CliError> {
    let e = EllipticCurveQ::parse(&c.curve)?;
    let tol = env.tolerance(c.tol, DEFAULT_HEIGHT_TOL)?;
    r.input("curve", e.to_string());
    r.input("tol", tol);
    r.input("max_doublings", c.max_doublings);
    Ok((e, HeightOptions { tol, max_doublings: c.max_doublings }))
}

fn ntheight(c: &CurveArgs, point: &str, env: &Env) -> Result<Report, CliError> {
    let mut r = Report::default();
    let (e, opts) = height_setup(c, env, &mut r)?;
    let p = e.parse_point(point)?;
    r.input("point", p.to_string());
    let h = canonical_height(&e, &p, &opts)?;
    r.result("height", h.value);
    r.result("doublings", h.doublings);
    r.result("error_bound", h.error_bound);
    r.result("naive_height", naive_height(&p));
    r.result("torsion_order", h.torsion_order.map_or(Value::Null, Value::from));
    r.line(format!("height {}", h.value));
    match h.torsion_order {
        Some(n) => r.line(format!("torsion point of order {}", n)),
        None => r.line(format!("{} doublings, error bound {:e}", h.doublings, h.error_bound)),
    }
    Ok(r)
}

fn ntpair(c: &CurveArgs, p: &str, q: &str, env: &Env) -> Result<Report, CliError> {
    let mut r = Report::default();
    let (e, opts) = height_setup(c, env, &mut r)?;
    let p = e.parse_point(p)?;
    let q = e.parse_point(q)?;
    r.input("p", p.to_string());
    r.input("q", q.to_string());
    let v = nt_pairing(&e, &p, &q, &opts)?;
    r.result("pairing", v);
    r.line(format!("pairing {}", v));
    Ok(r)
}

fn ex5(c: &CurveArgs, pts: [&String; 4], genera: &str, env: &Env) -> Result<Report, CliError> {
    let mut r = Report::default();
    let (e, opts) = height_setup(c, env, &mut r)?;
    let parsed = pts.iter().map(|s| e.parse_point(s)).collect::<Result<Vec<_>, _>>()?;
    let genera: Vec<u32> = genera
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::usage(format!("bad genus '{}'", s.trim()))))
        .collect::<Result<_, _>>()?;
    for (name, p) in ["p1", "q1", "p2", "q2"].iter().zip(&parsed) {
        r.input(name, p.to_string());
    }
    r.input("genera", genera.clone());
    let g = graded_height_ex5(&e, [&parsed[0], &parsed[1], &parsed[2], &parsed[3]], &genera, &opts)?;
    r.result("factor", g.factor);
    r.result("nt_pairing", g.nt);
    r.result("value", g.value);
    r.line(format!("value {}", g.value));
    r.line(format!("factor {} times pairing {}", g.factor, g.nt));
    Ok(r)
}

fn arakelov(d: i64, alpha: &str) -> Result<Report, CliError> {
    let k = Field::from_d(d)?;
    let a = FieldElement::parse(&k, alpha)?;
    let div = arakelov::principal_divisor(&a)?;
    let deg = arakelov::degree(&div);
    let mut r = Report::default();
    r.input("field", k.to_string());
    r.input("alpha", a.to_string());
    r.result("norm", format_rational(&a.norm()));
    r.result("degree", deg);
    r.line(format!("alpha = {} in {}, norm {}", a, k, format_rational(&a.norm())));
    for (prime, m) in &div.finite {
        let contribution = *m as f64 * prime.log_norm();
        r.terms.push(json!({
            "place": prime.to_string(),
            "p": prime.p.to_string(),
            "splitting": format!("{:?}", prime.splitting),
            "residue_degree": prime.residue_degree(),
            "ramification_index": prime.ramification_index(),
            "valuation": m,
            "log_norm": prime.log_norm(),
            "contribution": contribution,
        }));
        r.line(format!("  {}  v = {}  {}", prime, m, contribution));
    }
    for (place, w) in &div.infinite {
        r.terms.push(json!({"place": place.to_string(), "contribution": w}));
        r.line(format!("  {}  {}", place, w));
    }
    r.line(format!("degree {}", deg));
    Ok(r)
}

fn parse_constant(s: &str) -> Result<ConstSymbol, CliError> {
    let e = spreads::parse_poly(s)?;
    match e {
        spreads::PolyExpr::Const(c) => Ok(c),
        _ => Err(CliError::usage(format!("'{}' is not a single constant", s))),
    }
}

fn spread(a: &crate::SpreadArgs) -> Result<Report, CliError> {
    if !(1..=60).contains(&a.digits) {
        return Err(CliError::usage(format!("--digits {} outside 1..=60", a.digits)));
    }
    let (text, mut opts) = match (&a.expr, a.example.as_deref()) {
        (Some(e), _) => (e.clone(), SpreadOptions::default()),
        (None, Some("ex000")) => (spreads::EX000.to_string(), SpreadOptions::default()),
        (None, Some("ec")) => (spreads::EC_CUBIC.to_string(), spreads::ec_options()),
        (None, Some(other)) => return Err(CliError::usage(format!("unknown example '{}' (expected ex000 or ec)", other))),
        (None, None) => return Err(CliError::usage("spread needs --expr or --example")),
    };
    match a.pi_mode.as_deref() {
        None => {}
        Some("relation") => opts.pi_mode = PiMode::Relation,
        Some("eliminate") => opts.pi_mode = PiMode::Eliminate,
        Some(other) => return Err(CliError::usage(format!("unknown pi mode '{}'", other))),
    }
    if let Some(list) = &a.adjoin {
        for s in list.split(',') {
            let c = parse_constant(s.trim())?;
            if !opts.adjoin.contains(&c) {
                opts.adjoin.push(c);
            }
        }
    }
    opts.over_z |= a.over_z;
    let expr = spreads::parse_poly(&text)?;
    let sp = spreads::spread(&expr, &opts);
    let report = spreads::verify_spread(&sp, a.digits)?;

    let mut r = Report::default();
    r.input("expr", text.as_str());
    r.input("over_z", opts.over_z);
    r.input("pi_mode", if opts.pi_mode == PiMode::Eliminate { "eliminate" } else { "relation" });
    r.input("adjoin", opts.adjoin.iter().map(|c| c.to_string()).collect::<Vec<_>>());
    r.result("main", sp.main.to_string());
    r.result("relations", sp.relations.iter().map(|p| p.to_string()).collect::<Vec<_>>());
    r.result(
        "substitution",
        Value::Array(sp.substitution.iter().map(|(c, v)| json!({"variable": v, "constant": c.to_string()})).collect()),
    );
    if let Some((v, d)) = &sp.inverted_denominator {
        r.result("inverted_denominator", json!({"variable": v, "denominator": d.to_string()}));
    }
    r.result(
        "verification",
        json!({
            "threshold": report.threshold,
            "passed": report.passed,
            "max_coefficient_error": report.max_coefficient_error,
            "relation_residuals": report.relation_residuals.iter().map(|(s, x)| json!({"relation": s, "residual": x})).collect::<Vec<_>>(),
        }),
    );
    r.line(format!("main: {}", sp.main));
    for rel in &sp.relations {
        r.line(format!("relation: {}", rel));
    }
    for (c, v) in &sp.substitution {
        r.line(format!("{} = {}", v, c));
    }
    if let Some((v, d)) = &sp.inverted_denominator {
        r.line(format!("{} = 1/{}", v, d));
    }
    r.line(format!("verified to {:e}", report.threshold));
    Ok(r)
}
