//! One function per subcommand. Each returns the `result` object of the
//! report; any `pass` flag inside it takes part in the exit code.

use std::collections::BTreeMap;

use higher_transport::bf_theory::{action_decomposition, bf_action, criticality_check, GridSpec, PairingSpec};
use higher_transport::extraction::{extract_one_form, extract_two_form};
use higher_transport::forms::{fake_curvature_residual, ConnectionPair, PairOptions, FC_TOLERANCE_FD};
use higher_transport::geometry::{loop_to_path, Bigon, Path, SmoothingProfile};
use higher_transport::higher_group::{verify_axioms, verify_interchange};
use higher_transport::quadrature::halton_in_box;
use higher_transport::transgression::{
    loop_holonomy, transgressed_a, transgressed_phi, transgression_consistency, LoopTangent,
};
use higher_transport::transport::{path_transport, stokes_check, surface_transport, two_functor};
use higher_transport::{Error, Result};
use serde_json::{json, Value};

use crate::config::Config;
use crate::report::{algebra, group, matrix, num, nums};

pub const COMMANDS: [&str; 8] = [
    "holonomy",
    "surface",
    "check-cm",
    "check-fc",
    "roundtrip",
    "stokes",
    "bf",
    "transgress",
];

pub fn run(command: &str, cfg: &Config) -> Result<Value> {
    let tol = cfg.tolerances();
    match command {
        "holonomy" => holonomy(cfg, &tol),
        "surface" => surface(cfg, &tol),
        "check-cm" => check_cm(cfg, &tol),
        "check-fc" => check_fc(cfg, &tol),
        "roundtrip" => roundtrip(cfg, &tol),
        "stokes" => stokes(cfg, &tol),
        "bf" => bf(cfg, &tol),
        "transgress" => transgress(cfg, &tol),
        other => unreachable!("unknown command {other}"),
    }
}

/// The fake-flat pair of the config; a fake-curvature failure is a config
/// error located at `/b`.
fn pair(cfg: &Config, tol: &BTreeMap<String, f64>) -> Result<ConnectionPair> {
    let cm = cfg.crossed_module()?;
    let a = cfg.a(cm.g())?;
    let b = cfg.b(cm.h(), &a)?;
    let opts = PairOptions {
        domain: Some(cfg.domain()?),
        seed: cfg.seed(),
        tolerance: cfg.tolerance_overridden("fake_curvature").then(|| tol["fake_curvature"]),
        ..PairOptions::default()
    };
    ConnectionPair::with_options(&cm, a, b, &opts).map_err(|e| match e {
        Error::FakeCurvature { .. } => Error::config("/b", e.to_string()),
        e => e,
    })
}

fn holonomy(cfg: &Config, tol: &BTreeMap<String, f64>) -> Result<Value> {
    let cm = cfg.crossed_module()?;
    let a = cfg.a(cm.g())?;
    let path = cfg.path("holonomy")?;
    let g = path_transport(&a, &path, &cfg.integrator()?)?;
    let residual = g.descriptor().group_residual(g.matrix());
    Ok(json!({
        "g": group(&g),
        "group_residual": num(residual),
        "pass": residual <= tol["group_membership"],
    }))
}

fn surface(cfg: &Config, tol: &BTreeMap<String, f64>) -> Result<Value> {
    let pair = pair(cfg, tol)?;
    let bigon = cfg.bigon("surface")?;
    let st = surface_transport(&pair, &bigon, &cfg.integrator()?)?;
    let fc = pair.fake_curvature_report();
    Ok(json!({
        "k": group(&st.k),
        "g_source": group(&st.g_source),
        "g_target": group(&st.g_target),
        "matching_residual": num(st.matching_residual),
        "fake_curvature": {"max_residual": num(fc.max_residual), "tolerance": num(fc.tolerance)},
        "pass": st.matching_residual <= tol["target_matching"],
    }))
}

fn check_cm(cfg: &Config, tol: &BTreeMap<String, f64>) -> Result<Value> {
    let cm = cfg.crossed_module()?;
    let n = cfg.samples(200);
    let seed = cfg.seed();
    let r = verify_axioms(&cm, n, seed);
    let interchange = verify_interchange(&cm, n.div_ceil(2), seed)?;
    let t = tol["axioms"];
    Ok(json!({
        "axioms": {
            "t_homomorphism": num(r.t_homomorphism),
            "alpha_homomorphism": num(r.alpha_homomorphism),
            "alpha_identity": num(r.alpha_identity),
            "alpha_action": num(r.alpha_action),
            "equivariance": num(r.equivariance),
            "peiffer": num(r.peiffer),
            "max_residual": num(r.max_residual()),
            "samples": n,
            "pass": r.max_residual() <= t,
        },
        "interchange": {
            "residual": num(interchange),
            "quadruples": n.div_ceil(2),
            "pass": interchange <= t,
        },
    }))
}

fn check_fc(cfg: &Config, tol: &BTreeMap<String, f64>) -> Result<Value> {
    let cm = cfg.crossed_module()?;
    let a = cfg.a(cm.g())?;
    let b = cfg.b(cm.h(), &a)?;
    let mut r = fake_curvature_residual(&cm, &a, &b, &cfg.domain()?, cfg.samples(256), cfg.seed());
    if cfg.tolerance_overridden("fake_curvature") {
        r.tolerance = tol["fake_curvature"];
    } else if !r.symbolic {
        r.tolerance = FC_TOLERANCE_FD;
    }
    Ok(json!({
        "max_residual": num(r.max_residual),
        "argmax": nums(&r.argmax),
        "samples": r.samples,
        "symbolic": r.symbolic,
        "tolerance": num(r.tolerance),
        "pass": r.passes(),
    }))
}

fn roundtrip(cfg: &Config, tol: &BTreeMap<String, f64>) -> Result<Value> {
    let pair = pair(cfg, tol)?;
    let icfg = cfg.integrator()?;
    let fd = cfg.fd()?;
    let n = cfg.dim();
    let mut bounds = cfg.domain()?;
    bounds.extend(vec![(-1.0, 1.0); 2 * n]);
    let samples = halton_in_box(&bounds, cfg.samples(16), cfg.seed(), 0.0);
    let tf = two_functor(&pair, &icfg);
    let f_path = |p: &Path| path_transport(pair.a(), p, &icfg);
    let f_bigon = |b: &Bigon| tf.bigon(b);
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for s in &samples {
        let (x, v1, v2) = (&s[..n], &s[n..2 * n], &s[2 * n..]);
        e1 = e1.max(extract_one_form(&f_path, x, v1, &fd)?.distance(&pair.a().eval(x, v1)));
        e2 = e2.max(extract_two_form(&f_bigon, x, v1, v2, &fd)?.distance(&pair.b().eval(x, v1, v2)));
    }
    let (p1, p2) = (e1 <= tol["one_form"], e2 <= tol["two_form"]);
    Ok(json!({
        "samples": samples.len(),
        "one_form": {"max_error": num(e1), "pass": p1},
        "two_form": {"max_error": num(e2), "pass": p2},
    }))
}

fn stokes(cfg: &Config, tol: &BTreeMap<String, f64>) -> Result<Value> {
    let cm = cfg.crossed_module()?;
    let a = cfg.a(cm.g())?;
    let profile = SmoothingProfile::default();
    let gamma = loop_to_path(&cfg.loop_("stokes")?, profile);
    let sigma = Bigon::contraction(&gamma, profile)?;
    let r = stokes_check(&a, &sigma, &cfg.integrator()?)?;
    Ok(json!({
        "holonomy": group(&r.lhs),
        "surface_exponential": group(&r.rhs),
        "error": num(r.error),
        "pass": r.error <= tol["stokes"],
    }))
}

fn bf(cfg: &Config, tol: &BTreeMap<String, f64>) -> Result<Value> {
    if cfg.dim() != 4 {
        return Err(Error::config("/ambient_dim", "the BF action is defined on R^4"));
    }
    let cm = cfg.crossed_module()?;
    let a = cfg.a(cm.g())?;
    let b = cfg.b(cm.h(), &a)?;
    let settings = cfg.bf_settings();
    let pairing = PairingSpec::for_group(cm.g());
    let mut grid = GridSpec::with_n(settings.grid_n);
    grid.domain.copy_from_slice(&cfg.domain()?);
    let s = bf_action(&cm, &a, &b, &pairing, &grid)?;
    let terms = action_decomposition(&cm, &a, &b, &pairing, &grid)?;
    let crit = criticality_check(&cm, &a, &b, &pairing, &grid, settings.directions, settings.epsilon, cfg.seed())?;
    let critical = crit.max_derivative <= tol["criticality"];
    let mut out = json!({
        "S": num(s.value),
        "S_error_estimate": num(s.error_estimate),
        "terms": {
            "yang_mills": num(terms.yang_mills),
            "bf_term": num(terms.bf_term),
            "cosmological": num(terms.cosmological),
        },
        "beta_sup": num(crit.beta_sup),
        "criticality": {
            "derivatives": nums(&crit.derivatives),
            "max_derivative": num(crit.max_derivative),
            "epsilon": num(crit.epsilon),
            "critical": critical,
        },
    });
    if let Some(expect) = settings.expect_critical {
        out["expect_critical"] = json!(expect);
        out["pass"] = json!(critical == expect);
    }
    Ok(out)
}

fn transgress(cfg: &Config, tol: &BTreeMap<String, f64>) -> Result<Value> {
    let pair = pair(cfg, tol)?;
    let icfg = cfg.integrator()?;
    let mut out = json!({});
    if cfg.has("loop") {
        let tau = cfg.loop_("transgress")?;
        let h = loop_holonomy(pair.a(), &tau, &icfg)?;
        let tr = h.matrix().trace();
        out["holonomy"] = group(&h);
        out["holonomy_trace"] = json!({"re": num(tr.re), "im": num(tr.im)});
        if cfg.has("variation") {
            let tangent = LoopTangent::new(tau, cfg.variation("transgress")?);
            out["a_f"] = algebra(&transgressed_a(&pair, &tangent)?);
            out["phi_f"] = algebra(&transgressed_phi(&pair, &tangent, &icfg)?);
        }
    }
    if let Some(gamma) = cfg.loop_path()? {
        let r = transgression_consistency(&pair, &gamma, &icfg)?;
        out["consistency"] = json!({
            "functor_h": matrix(r.functor_h.matrix()),
            "forms_h": matrix(r.forms_h.matrix()),
            "defect": num(r.defect),
            "base_defect": num(r.base_defect),
            "pass": r.defect <= tol["transgression"] && r.base_defect <= tol["transgression"],
        });
    }
    if out.as_object().unwrap().is_empty() {
        return Err(Error::config("/loop", "`transgress` needs a loop or a loop_path"));
    }
    Ok(out)
}

/// Every `pass` flag in a report, depth first.
pub fn all_pass(v: &Value) -> bool {
    match v {
        Value::Object(map) => map
            .iter()
            .all(|(k, v)| if k == "pass" { v.as_bool() != Some(false) } else { all_pass(v) }),
        Value::Array(items) => items.iter().all(all_pass),
        _ => true,
    }
}
