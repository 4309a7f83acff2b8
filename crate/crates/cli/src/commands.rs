use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wkstab::blowup::{self, ExpansionOptions, Extras, Quantity};
use wkstab::config::{self, TcConfig, WeightConfig};
use wkstab::invariants::{self, Backend, EvalOptions, NewtonOptions};
use wkstab::profiles::{self, Family};
use wkstab::quadrature::QuadOptions;
use wkstab::report;
use wkstab::testconfig::{self, ToricContext, ToricTC};
use wkstab::{acceptance, rational, DelzantPolytope, Error, ExpansionReport, WeightPair};

use crate::args::{BackendArg, Command, Global, PolytopeArgs, QuantityArg, Target, TcArgs, TcCommand};

/// `df_T` below minus this is reported as a violation.
const VIOLATION_TOL: f64 = 1e-10;

pub type Result<T> = std::result::Result<T, Error>;

/// What a command produced: the report and any failed tolerance checks.
pub struct Output {
    pub body: String,
    pub failures: Vec<String>,
    /// Failures count even without `--strict`.
    pub always_fatal: bool,
}

impl Output {
    fn new(body: String) -> Self {
        Self { body, failures: Vec::new(), always_fatal: false }
    }

    fn with_failures(mut self, failures: Vec<String>) -> Self {
        self.failures = failures;
        self
    }
}

pub fn eval_options(g: &Global) -> EvalOptions {
    let backend = match g.backend {
        BackendArg::Quadrature => Backend::Quadrature,
        BackendArg::Localization => Backend::Localization,
        BackendArg::Both => Backend::Both,
    };
    let quad = QuadOptions { degree: g.quad_degree, tol_abs: g.tol_abs, tol_rel: g.tol_rel, max_depth: g.max_depth };
    EvalOptions { backend, quad, agreement_tol: g.agreement_tol, ..EvalOptions::default() }
}

fn polytope(args: &PolytopeArgs) -> Result<DelzantPolytope> {
    config::load_polytope(args.source())
}

fn weights(target: &Target, p: &DelzantPolytope) -> Result<WeightPair> {
    let w = &target.weights;
    let pair = if let Some(path) = &w.weights {
        WeightConfig::load(path)?.build(p)?
    } else {
        let family: Family = w.family.parse()?;
        let xi = w.xi.clone().unwrap_or_else(|| vec![0.0; p.dim()]);
        if xi.len() != p.dim() {
            return Err(Error::DimensionMismatch { expected: p.dim(), got: xi.len() });
        }
        match w.a {
            Some(a) => profiles::builtin(family, &xi, Some(a), Some(p))?,
            None => config::family_weights(family, &xi, p)?,
        }
    };
    invariants::ensure_positive(p, &pair)?;
    Ok(pair)
}

fn load_tc(path: &Path, dim: usize) -> Result<ToricTC> {
    TcConfig::load(path)?.build(dim)
}

fn check_dim(v: &[f64], dim: usize) -> Result<()> {
    if v.len() == dim {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: dim, got: v.len() })
    }
}

fn discrepancy_failure(d: Option<f64>, opts: &EvalOptions) -> Vec<String> {
    match d {
        Some(d) if !(d <= opts.agreement_tol) => {
            vec![format!("backend discrepancy {d:.3e} exceeds {:.1e}", opts.agreement_tol)]
        }
        _ => Vec::new(),
    }
}

fn no_csv(what: &str) -> Error {
    Error::MissingSeries(format!("`{what}` has no CSV output"))
}

pub fn run(command: &Command, g: &Global) -> Result<Output> {
    let opts = eval_options(g);
    match command {
        Command::Validate { polytope: src } => validate(src, g),
        Command::Invariants { target } | Command::ExtremalField { target } => {
            let p = polytope(&target.polytope)?;
            let w = weights(target, &p)?;
            let r = invariants::invariant_report(&p, &w, &opts)?;
            let body = if g.csv { report::gram_csv(&r.gram)? } else { report::to_json(&r)? };
            Ok(Output::new(body).with_failures(discrepancy_failure(r.backend_discrepancy, &opts)))
        }
        Command::Futaki { target, beta } => {
            let p = polytope(&target.polytope)?;
            check_dim(beta, p.dim())?;
            let w = weights(target, &p)?;
            let r = invariants::invariant_report(&p, &w, &opts)?;
            if g.csv {
                return Err(no_csv("futaki"));
            }
            let value: f64 = r.futaki.iter().zip(beta).map(|(f, b)| f * b).sum();
            let mut v = serde_json::to_value(&r)?;
            v["beta"] = json!(beta);
            v["futaki_beta"] = json!(value);
            Ok(Output::new(report::to_json(&v)?).with_failures(discrepancy_failure(r.backend_discrepancy, &opts)))
        }
        Command::Soliton { polytope: src, oracle, newton_tol } => {
            soliton(src, oracle.as_deref(), *newton_tol, g, &opts)
        }
        Command::Testconfig { which } => testconfig_command(which, g, &opts),
        Command::BlowupExpand { target, vertex, quantity, tc, beta, eps_max, eps_points, coefficient_tol } => {
            let p = polytope(&target.polytope)?;
            let w = weights(target, &p)?;
            if let Some(b) = beta {
                check_dim(b, p.dim())?;
            }
            let extras = Extras {
                beta: beta.clone(),
                tc: tc.as_deref().map(|path| load_tc(path, p.dim())).transpose()?,
                basis: None,
            };
            let expansion = ExpansionOptions {
                eval: opts,
                grid: None,
                eps_max: eps_max.as_deref().map(rational::parse).transpose()?,
                points: *eps_points,
                coefficient_tol: *coefficient_tol,
            };
            let r = blowup::verify_expansion(quantity_of(*quantity), &p, &w, *vertex, &extras, &expansion)?;
            let body = if g.csv { report::expansion_csv(&r)? } else { report::to_json(&r)? };
            Ok(Output::new(body).with_failures(expansion_failures(std::slice::from_ref(&r))))
        }
        Command::Report { target, tc, random, expand, tolerance } => {
            dossier(target, tc, *random, *expand, *tolerance, g, &opts)
        }
        Command::Selftest => selftest(g),
    }
}

fn quantity_of(q: QuantityArg) -> Quantity {
    match q {
        QuantityArg::Volume => Quantity::Volume,
        QuantityArg::Futaki => Quantity::Futaki,
        QuantityArg::Df => Quantity::Df,
        QuantityArg::Dft => Quantity::Dft,
        QuantityArg::Gram => Quantity::Gram,
    }
}

fn expansion_failures(reports: &[ExpansionReport]) -> Vec<String> {
    reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| {
            format!(
                "{} expansion at vertex {}: coefficient error {:.3e}, remainder exponent {:?} (need {:.2})",
                r.quantity, r.vertex, r.coefficient_rel_error, r.remainder_exponent, r.required_exponent
            )
        })
        .collect()
}

fn validate(src: &PolytopeArgs, g: &Global) -> Result<Output> {
    let p = polytope(src)?;
    if g.csv {
        return Err(no_csv("validate"));
    }
    let vertices: Vec<Value> = p
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            json!({
                "index": i,
                "coords": v.coords.iter().map(rational::format).collect::<Vec<_>>(),
                "adjacent_facets": v.adjacent_facets,
                "inward_edges": v.inward_edges,
                "admissible_chop_depth": rational::format(&p.admissible_chop_depth(i)),
            })
        })
        .collect();
    let v = json!({
        "name": p.name(),
        "dim": p.dim(),
        "delzant": true,
        "facets": p.facets().len(),
        "vertices": vertices,
        "volume": rational::format(&p.volume()),
        "lattice_perimeter": rational::format(&p.lattice_perimeter()),
        "reflexive": p.is_reflexive(),
    });
    Ok(Output::new(report::to_json(&v)?))
}

fn soliton(
    src: &PolytopeArgs,
    oracle: Option<&Path>,
    newton_tol: f64,
    g: &Global,
    opts: &EvalOptions,
) -> Result<Output> {
    let p = polytope(src)?;
    if g.csv {
        return Err(no_csv("soliton"));
    }
    let newton = NewtonOptions { tolerance: newton_tol, ..NewtonOptions::default() };
    let s = invariants::soliton_field(&p, opts, &newton)?;
    let inv = invariants::invariant_report(&p, &WeightPair::soliton(&s.xi), opts)?;
    let mut failures = discrepancy_failure(inv.backend_discrepancy, opts);
    let mut v = json!({ "soliton": s, "invariants": inv });
    if let Some(path) = oracle {
        let text = std::fs::read_to_string(path)?;
        let o: Value = serde_json::from_str(&text)?;
        let xi: Vec<f64> = serde_json::from_value(o["xi"].clone())?;
        check_dim(&xi, p.dim())?;
        let error = s.xi.iter().zip(&xi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if !(error <= 1e-8) {
            failures.push(format!("soliton field differs from the oracle by {error:.3e}"));
        }
        v["oracle"] = json!({ "xi": xi, "max_error": error });
    }
    Ok(Output::new(report::to_json(&v)?).with_failures(failures))
}

fn testconfig_command(which: &TcCommand, g: &Global, opts: &EvalOptions) -> Result<Output> {
    let (TcCommand::Df(args)
    | TcCommand::Dft(args)
    | TcCommand::Norm(args)
    | TcCommand::Chow(args)
    | TcCommand::Destabilize(args)) = which;
    let TcArgs { target, tc } = args;
    let p = polytope(&target.polytope)?;
    let w = weights(target, &p)?;
    let tc = load_tc(tc, p.dim())?;
    let ctx = ToricContext::new(&p, &w, opts)?;
    let name = p.name().unwrap_or("unnamed");
    let mut failures = Vec::new();
    if g.csv && !matches!(which, TcCommand::Chow(_)) {
        return Err(no_csv("testconfig"));
    }
    let v = match which {
        TcCommand::Df(_) => json!({ "polytope": name, "df": ctx.df(&tc)?, "average": ctx.average(&tc)? }),
        TcCommand::Dft(_) => {
            let df_t = ctx.df_t(&tc)?;
            if df_t < -VIOLATION_TOL {
                failures.push(format!("df_T = {df_t:.6e} < 0"));
            }
            json!({
                "polytope": name,
                "df": ctx.df(&tc)?,
                "df_t": df_t,
                "df_extremal": ctx.df_extremal(&tc)?,
                "lambda": ctx.lambda(&tc)?,
            })
        }
        TcCommand::Norm(_) => {
            let (_, orthogonal_norm) = ctx.orthogonal_part(&tc)?;
            json!({ "polytope": name, "norm": ctx.l1_norm(&tc)?, "orthogonal_norm": orthogonal_norm })
        }
        TcCommand::Chow(_) => {
            let table = ctx.chow_table(&tc)?;
            if g.csv {
                return Ok(Output::new(report::chow_csv(&table)?));
            }
            json!({ "polytope": name, "average": ctx.average(&tc)?, "chow_table": table })
        }
        TcCommand::Destabilize(_) => {
            let d = ctx.destabilizing_vertex(&tc)?;
            if !d.product && !(d.chow_t > 0.0) {
                failures.push(format!("orthogonal Chow weight {:.6e} is not positive", d.chow_t));
            }
            json!({ "polytope": name, "destabilizing": d })
        }
    };
    Ok(Output::new(report::to_json(&v)?).with_failures(failures))
}

fn dossier(
    target: &Target,
    files: &[std::path::PathBuf],
    random: usize,
    expand: bool,
    tolerance: f64,
    g: &Global,
    opts: &EvalOptions,
) -> Result<Output> {
    let p = polytope(&target.polytope)?;
    let w = weights(target, &p)?;
    let mut tcs = Vec::new();
    for path in files {
        let label = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        tcs.push((label, load_tc(path, p.dim())?));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    for k in 0..random {
        tcs.push((format!("random-{k}"), ToricTC::new(testconfig::random_pl(&mut rng, p.dim()))));
    }
    let mut d = report::build_dossier(&p, &w, &tcs, Vec::new(), opts, tolerance)?;
    if expand && p.dim() == 2 {
        let expansion = ExpansionOptions { eval: opts.clone(), ..ExpansionOptions::default() };
        for (r, (_, tc)) in d.test_configurations.iter().zip(&tcs) {
            let Some(vertex) = r.destabilizing.vertex else { continue };
            let extras = Extras { tc: Some(tc.clone()), ..Extras::default() };
            for q in [Quantity::Df, Quantity::Dft] {
                d.expansions.push(blowup::verify_expansion(q, &p, &w, vertex, &extras, &expansion)?);
            }
        }
    }
    if g.csv {
        let first = d
            .test_configurations
            .first()
            .ok_or_else(|| Error::MissingSeries("report has no test configurations".into()))?;
        return Ok(Output::new(report::chow_csv(&first.chow_table)?));
    }
    let mut failures: Vec<String> = d.violations.iter().map(|l| format!("df_T < −{tolerance:e} for `{l}`")).collect();
    failures.extend(expansion_failures(&d.expansions));
    failures.extend(discrepancy_failure(d.invariants.backend_discrepancy, opts));
    Ok(Output::new(report::to_json(&d)?).with_failures(failures))
}

fn selftest(g: &Global) -> Result<Output> {
    if g.csv {
        return Err(no_csv("selftest"));
    }
    let mut results = Vec::new();
    for id in 1..=acceptance::CRITERIA.len() {
        let r = acceptance::run_criterion(id);
        eprintln!("{}", r.line());
        results.push(r);
    }
    let failures =
        results.iter().filter(|r| !r.pass).map(|r| format!("criterion {} ({}) failed", r.id, r.name)).collect();
    let mut out = Output::new(report::to_json(&results)?).with_failures(failures);
    out.always_fatal = true;
    Ok(out)
}
