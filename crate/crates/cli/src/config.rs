//! Configuration loading: schema validation, then typed extraction with
//! JSON-pointer locations for every semantic error.

use std::collections::BTreeMap;

use higher_transport::extraction::FdConfig;
use higher_transport::forms::{ambient_vars, Expr, OneFormField, TwoFormField};
use higher_transport::geometry::{
    reparameterize, standard_bigon, Bigon, BigonJet, Loop, Path, Point, Reparam, SmoothingProfile, SurfaceMap,
};
use higher_transport::higher_group::CrossedModule;
use higher_transport::lie_core::GroupDescriptor;
use higher_transport::transgression::LoopPath;
use higher_transport::transport::IntegratorConfig;
use higher_transport::{Error, Result};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = include_str!("../../../configs/schema.json");

/// Endpoint and closure checks on user geometry.
const GEOMETRY_TOLERANCE: f64 = 1e-8;

/// Default pass thresholds, overridable under `/tolerances`.
const DEFAULT_TOLERANCES: [(&str, f64); 9] = [
    ("axioms", 1e-9),
    ("criticality", 1e-4),
    ("fake_curvature", higher_transport::forms::FC_TOLERANCE_SYMBOLIC),
    ("group_membership", 1e-8),
    ("one_form", 5e-5),
    ("stokes", 1e-5),
    ("target_matching", 1e-6),
    ("transgression", 1e-4),
    ("two_form", 1e-4),
];

fn config_error(pointer: &str, message: impl Into<String>) -> Error {
    Error::config(pointer, message)
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub steps: Option<usize>,
}

/// A validated configuration.
pub struct Config {
    root: Value,
    sha256: String,
    overrides: Overrides,
}

impl Config {
    /// Parses and validates raw bytes. The hash covers the bytes as given.
    pub fn from_bytes(bytes: &[u8], overrides: Overrides) -> Result<Self> {
        let sha256 = hex::encode(Sha256::digest(bytes));
        let root: Value =
            serde_json::from_slice(bytes).map_err(|e| config_error("", format!("invalid JSON: {e}")))?;
        let schema: Value = serde_json::from_str(SCHEMA).expect("shipped schema is valid JSON");
        let validator = jsonschema::validator_for(&schema).expect("shipped schema compiles");
        if let Some(e) = validator.iter_errors(&root).next() {
            return Err(config_error(e.instance_path.as_str(), e.to_string()));
        }
        let cfg = Self {
            root,
            sha256,
            overrides,
        };
        let n = cfg.dim();
        for key in ["a", "domain"] {
            if let Some(Value::Array(items)) = cfg.root.get(key) {
                if items.len() != n {
                    return Err(config_error(
                        &format!("/{key}"),
                        format!("expected {n} entries for ambient dimension {n}, got {}", items.len()),
                    ));
                }
            }
        }
        Ok(cfg)
    }

    pub fn sha256(&self) -> &str {
        &self.sha256
    }

    /// Rejects a config whose `command` names a different subcommand.
    pub fn check_command(&self, command: &str) -> Result<()> {
        match self.root.get("command").and_then(Value::as_str) {
            Some(c) if c != command => Err(config_error(
                "/command",
                format!("config is for `{c}` but `{command}` was requested"),
            )),
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        self.root["ambient_dim"].as_u64().expect("schema guarantees ambient_dim") as usize
    }

    fn vars(&self) -> Vec<String> {
        ambient_vars(self.dim())
    }

    pub fn crossed_module(&self) -> Result<CrossedModule> {
        let name = self.root["crossed_module"].as_str().expect("schema guarantees crossed_module");
        CrossedModule::parse(name).map_err(|e| config_error("/crossed_module", e.to_string()))
    }

    pub fn seed(&self) -> u64 {
        self.overrides
            .seed
            .or_else(|| self.root.get("seed").and_then(Value::as_u64))
            .unwrap_or(0)
    }

    pub fn samples(&self, default: usize) -> usize {
        self.root
            .get("samples")
            .and_then(Value::as_u64)
            .map_or(default, |n| n as usize)
    }

    pub fn integrator(&self) -> Result<IntegratorConfig> {
        let mut cfg = IntegratorConfig::default();
        if let Some(obj) = self.root.get("integrator") {
            let int = |k: &str| obj.get(k).and_then(Value::as_u64).map(|v| v as usize);
            cfg.n_steps_path = int("n_steps_path").unwrap_or(cfg.n_steps_path);
            cfg.n_steps_surface_s = int("n_steps_surface_s").unwrap_or(cfg.n_steps_surface_s);
            cfg.n_quad_t = int("n_quad_t").unwrap_or(cfg.n_quad_t);
            cfg.retraction = obj.get("retraction").and_then(Value::as_bool).unwrap_or(cfg.retraction);
        }
        if let Some(n) = self.overrides.steps {
            let retraction = cfg.retraction;
            cfg = IntegratorConfig::uniform(n);
            cfg.retraction = retraction;
        }
        cfg.validate().map_err(|e| config_error("/integrator", e.to_string()))?;
        Ok(cfg)
    }

    pub fn fd(&self) -> Result<FdConfig> {
        let mut fd = FdConfig::default();
        if let Some(obj) = self.root.get("fd") {
            fd.step = obj.get("step").and_then(Value::as_f64).unwrap_or(fd.step);
            fd.richardson = obj.get("richardson").and_then(Value::as_bool).unwrap_or(fd.richardson);
        }
        fd.validate().map_err(|e| config_error("/fd", e.to_string()))?;
        Ok(fd)
    }

    /// Every tolerance in effect, defaults merged with `/tolerances`.
    pub fn tolerances(&self) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        if let Some(Value::Object(obj)) = self.root.get("tolerances") {
            for (k, v) in obj {
                if let Some(v) = v.as_f64() {
                    out.insert(k.clone(), v);
                }
            }
        }
        out
    }

    pub fn tolerance_overridden(&self, key: &str) -> bool {
        self.root.get("tolerances").and_then(|t| t.get(key)).is_some()
    }

    pub fn domain(&self) -> Result<Vec<(f64, f64)>> {
        let Some(Value::Array(items)) = self.root.get("domain") else {
            return Ok(vec![(0.0, 1.0); self.dim()]);
        };
        items
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let (lo, hi) = (v[0].as_f64().unwrap(), v[1].as_f64().unwrap());
                if hi > lo {
                    Ok((lo, hi))
                } else {
                    Err(config_error(&format!("/domain/{i}"), "interval is empty"))
                }
            })
            .collect()
    }

    pub fn bf_settings(&self) -> BfSettings {
        let obj = self.root.get("bf");
        let get = |k: &str| obj.and_then(|o| o.get(k));
        BfSettings {
            grid_n: get("grid_n").and_then(Value::as_u64).map_or(12, |v| v as usize),
            directions: get("directions").and_then(Value::as_u64).map_or(8, |v| v as usize),
            epsilon: get("epsilon")
                .and_then(Value::as_f64)
                .unwrap_or(higher_transport::bf_theory::DEFAULT_EPSILON),
            expect_critical: get("expect_critical").and_then(Value::as_bool),
        }
    }

    /// The 1-form `A` with values in `G`; zero when absent.
    pub fn a(&self, g: &GroupDescriptor) -> Result<OneFormField> {
        let Some(items) = self.root.get("a") else {
            return Ok(OneFormField::zero(*g, self.dim()));
        };
        let rows: Vec<Vec<Vec<String>>> = items
            .as_array()
            .unwrap()
            .iter()
            .enumerate()
            .map(|(i, m)| self.matrix(m, &format!("/a/{i}"), g.dim()))
            .collect::<Result<_>>()?;
        OneFormField::from_exprs(*g, &rows).map_err(|e| config_error("/a", e.to_string()))
    }

    /// The 2-form `B` with values in `H`; zero when absent.
    pub fn b(&self, h: &GroupDescriptor, a: &OneFormField) -> Result<TwoFormField> {
        let n = self.dim();
        match self.root.get("b") {
            None => Ok(TwoFormField::zero(*h, n)),
            Some(Value::String(_)) => {
                if a.descriptor().family() != h.family() {
                    return Err(config_error(
                        "/b",
                        format!("\"curvature\" needs G = H, but G = {} and H = {}", a.descriptor().name(), h.name()),
                    ));
                }
                Ok(TwoFormField::curvature_of(a))
            }
            Some(Value::Array(items)) => {
                let mut entries = Vec::with_capacity(items.len());
                for (k, item) in items.iter().enumerate() {
                    let plane: Vec<usize> = item["plane"]
                        .as_array()
                        .unwrap()
                        .iter()
                        .map(|v| v.as_u64().unwrap() as usize)
                        .collect();
                    let (i, j) = (plane[0], plane[1]);
                    if i > n || j > n || i == j {
                        return Err(config_error(
                            &format!("/b/{k}/plane"),
                            format!("({i}, {j}) is not a coordinate plane of R^{n}"),
                        ));
                    }
                    entries.push(((i, j), self.matrix(&item["value"], &format!("/b/{k}/value"), h.dim())?));
                }
                TwoFormField::from_exprs(*h, n, &entries).map_err(|e| config_error("/b", e.to_string()))
            }
            Some(_) => unreachable!("schema restricts /b"),
        }
    }

    /// A square matrix of expressions in the ambient coordinates.
    fn matrix(&self, m: &Value, pointer: &str, size: usize) -> Result<Vec<Vec<String>>> {
        let vars = self.vars();
        let vars: Vec<&str> = vars.iter().map(String::as_str).collect();
        let rows = m.as_array().unwrap();
        if rows.len() != size {
            return Err(config_error(pointer, format!("expected a {size}x{size} matrix")));
        }
        let mut out = Vec::with_capacity(size);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_array().unwrap();
            if row.len() != size {
                return Err(config_error(&format!("{pointer}/{r}"), format!("expected {size} entries")));
            }
            let mut parsed = Vec::with_capacity(size);
            for (c, e) in row.iter().enumerate() {
                let src = e.as_str().unwrap();
                Expr::parse(src, &vars).map_err(|err| config_error(&format!("{pointer}/{r}/{c}"), err.to_string()))?;
                parsed.push(src.to_string());
            }
            out.push(parsed);
        }
        Ok(out)
    }

    /// Real-valued coordinate expressions in the given parameters, with
    /// their first derivatives.
    fn curve(&self, pointer: &str, params: &[&str]) -> Result<(Vec<Expr>, Vec<Vec<Expr>>)> {
        let items = self.root.pointer(pointer).and_then(Value::as_array).unwrap();
        let n = self.dim();
        if items.len() != n {
            return Err(config_error(pointer, format!("expected {n} coordinates, got {}", items.len())));
        }
        let mut exprs = Vec::with_capacity(n);
        for (i, e) in items.iter().enumerate() {
            let p = format!("{pointer}/{i}");
            let expr = Expr::parse(e.as_str().unwrap(), params).map_err(|err| config_error(&p, err.to_string()))?;
            for k in 0..=8 {
                let x = vec![k as f64 / 8.0; params.len()];
                let v = expr.eval(&x);
                if !v.re.is_finite() || v.im.abs() > 1e-12 {
                    return Err(config_error(&p, format!("coordinate must be real and finite, got {v} at {x:?}")));
                }
            }
            exprs.push(expr);
        }
        let derivs = (0..params.len())
            .map(|k| exprs.iter().map(|e| e.diff(k)).collect())
            .collect();
        Ok((exprs, derivs))
    }

    fn require(&self, key: &str, command: &str) -> Result<()> {
        if self.root.get(key).is_none() {
            return Err(config_error(&format!("/{key}"), format!("required by `{command}`")));
        }
        Ok(())
    }

    pub fn path(&self, command: &str) -> Result<Path> {
        self.require("path", command)?;
        let (x, d) = self.curve("/path/points", &["t"])?;
        let dx = d.into_iter().next().unwrap();
        let path = Path::new(self.dim(), move |t| (real_point(&x, &[t]), real_point(&dx, &[t])));
        let sitting = self.root["path"].get("sitting").and_then(Value::as_bool).unwrap_or(false);
        Ok(if sitting {
            reparameterize(&path, &Reparam::profile(SmoothingProfile::default()))
        } else {
            path
        })
    }

    pub fn bigon(&self, command: &str) -> Result<Bigon> {
        self.require("bigon", command)?;
        let n = self.dim();
        if self.root["bigon"].get("map").is_some() {
            let (x, d) = self.curve("/bigon/map", &["s", "t"])?;
            let (ds, dt) = (d[0].clone(), d[1].clone());
            let bigon = Bigon::new(n, move |s, t| BigonJet {
                point: real_point(&x, &[s, t]),
                ds: real_point(&ds, &[s, t]),
                dt: real_point(&dt, &[s, t]),
            });
            let (x0, x1) = (bigon.point(0.0, 0.0), bigon.point(0.0, 1.0));
            for k in 0..=16 {
                let s = k as f64 / 16.0;
                if (bigon.point(s, 0.0) - &x0).amax() > GEOMETRY_TOLERANCE
                    || (bigon.point(s, 1.0) - &x1).amax() > GEOMETRY_TOLERANCE
                {
                    return Err(config_error(
                        "/bigon/map",
                        format!("endpoints must not move with s; they do at s = {s}"),
                    ));
                }
            }
            Ok(bigon)
        } else {
            let (x, d) = self.curve("/bigon/standard/chart", &["s", "t"])?;
            let (ds, dt) = (d[0].clone(), d[1].clone());
            let chart = SurfaceMap::new(n, move |s, t| BigonJet {
                point: real_point(&x, &[s, t]),
                ds: real_point(&ds, &[s, t]),
                dt: real_point(&dt, &[s, t]),
            });
            let std = &self.root["bigon"]["standard"];
            Ok(standard_bigon(&chart, std["s"].as_f64().unwrap(), std["t"].as_f64().unwrap()))
        }
    }

    pub fn has(&self, key: &str) -> bool {
        self.root.get(key).is_some()
    }

    pub fn loop_(&self, command: &str) -> Result<Loop> {
        self.require("loop", command)?;
        let (x, d) = self.curve("/loop", &["z"])?;
        let dx = d.into_iter().next().unwrap();
        let tau = Loop::new(self.dim(), move |z| (real_point(&x, &[z]), real_point(&dx, &[z])));
        if tau.closure_defect() > GEOMETRY_TOLERANCE {
            return Err(config_error("/loop", format!("not closed: |τ(0) - τ(1)| = {:.3e}", tau.closure_defect())));
        }
        Ok(tau)
    }

    pub fn variation(&self, command: &str) -> Result<Box<dyn Fn(f64) -> Point + Send + Sync>> {
        self.require("variation", command)?;
        let (x, _) = self.curve("/variation", &["z"])?;
        Ok(Box::new(move |z| real_point(&x, &[z])))
    }

    pub fn loop_path(&self) -> Result<Option<LoopPath>> {
        let Some(c) = self.root.get("loop_path").map(|l| &l["cylinder"]) else {
            return Ok(None);
        };
        let n = self.dim();
        let vector = |k: &str| -> Result<Point> {
            let v: Vec<f64> = c[k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
            if v.len() != n {
                return Err(config_error(&format!("/loop_path/cylinder/{k}"), format!("expected {n} components")));
            }
            Ok(Point::from_vec(v))
        };
        Ok(Some(LoopPath::cylinder(
            vector("center")?,
            vector("axis")?,
            c["r0"].as_f64().unwrap(),
            c["r1"].as_f64().unwrap(),
            vector("e1")?,
            vector("e2")?,
            SmoothingProfile::default(),
        )))
    }

    pub fn integrator_json(cfg: &IntegratorConfig) -> Value {
        serde_json::json!({
            "n_steps_path": cfg.n_steps_path,
            "n_steps_surface_s": cfg.n_steps_surface_s,
            "n_quad_t": cfg.n_quad_t,
            "retraction": cfg.retraction,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BfSettings {
    pub grid_n: usize,
    pub directions: usize,
    pub epsilon: f64,
    pub expect_critical: Option<bool>,
}

fn real_point(exprs: &[Expr], params: &[f64]) -> Point {
    Point::from_iterator(exprs.len(), exprs.iter().map(|e| e.eval(params).re))
}
