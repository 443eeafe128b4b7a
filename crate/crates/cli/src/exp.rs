use std::fs;
use std::io::Write;

use rrt_core::experiments::{run_experiment, AggregateReport, ExperimentConfig};
use serde_json::{json, Map, Value};

use crate::args::ExpArgs;
use crate::output::{header, resolve_seed, Sink};
use crate::{CliError, Outcome};

const DEFAULT_N: u64 = 1 << 12;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Effective config: defaults, then the config file, then flags.
pub fn build_config(a: &ExpArgs) -> Result<ExperimentConfig, CliError> {
    let defaults = ExperimentConfig::new(a.kind, DEFAULT_N, 1000, 0);
    let Value::Object(mut cfg) =
        serde_json::to_value(&defaults).map_err(|e| usage(e.to_string()))?
    else {
        unreachable!("configs serialise to objects")
    };
    let mut seed_given = false;
    if let Some(path) = &a.config {
        let text =
            fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let Value::Object(file) =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        else {
            return Err(usage(format!("{}: expected a JSON object", path.display())));
        };
        if let Some(kind) = file.get("experiment") {
            if kind != &json!(a.kind.name()) {
                return Err(usage(format!(
                    "config is for experiment {kind}, not {}",
                    a.kind.name()
                )));
            }
        }
        seed_given = file.contains_key("seed");
        cfg.extend(file);
    }
    let mut set = |key: &str, v: Value| {
        cfg.insert(key.to_string(), v);
    };
    if let Some(n) = a.n {
        set("n", json!(n));
    }
    if let Some(k) = a.k {
        set("k", json!(k));
    }
    if let Some(r) = a.reps {
        set("replicates", json!(r));
    }
    if let Some(t) = a.common.threads {
        set("threads", json!(t));
    }
    if !a.labels.is_empty() {
        set("labels", json!(a.labels));
    }
    if !a.degrees.is_empty() {
        set("degrees", json!(a.degrees));
    }
    if !a.j.is_empty() {
        set("j", json!(a.j));
    }
    if !a.orders.is_empty() {
        set("orders", json!(a.orders));
    }
    if !a.rects.is_empty() {
        set("rects", json!(a.rects));
    }
    if !a.sizes.is_empty() {
        set("sizes", json!(a.sizes));
    }
    if !a.eps.is_empty() {
        set("eps", json!(a.eps));
    }
    if !a.k_range.is_empty() {
        let [lo, hi] = a.k_range[..] else {
            return Err(usage("--k-range takes lo,hi"));
        };
        set("k_range", json!([lo, hi]));
    }
    if let Some(w) = a.with_labels {
        set("with_labels", json!(w));
    }
    if let Some(t) = a.ks_tolerance {
        set("ks_tolerance", json!(t));
    }
    if a.degree_marks {
        set("asymptotic_marks", json!(false));
    }
    if a.common.seed.is_some() || !seed_given {
        set("seed", json!(resolve_seed(a.common.seed)));
    }
    let cfg: ExperimentConfig =
        serde_json::from_value(Value::Object(cfg)).map_err(|e| usage(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Config as hashed into the header. The worker count is left out since
/// results do not depend on it.
fn provenance(cfg: &ExperimentConfig) -> Value {
    let mut c = cfg.clone();
    c.threads = None;
    serde_json::to_value(&c).expect("configs serialise")
}

fn summary(report: &AggregateReport) -> String {
    let mut lines = Vec::new();
    for r in report.rows.iter().filter(|r| r.pass.is_some()) {
        let reference = r
            .reference
            .map_or(String::new(), |x| format!(" reference={x:.6}"));
        let tol = r
            .tolerance
            .map_or(String::new(), |x| format!(" tolerance={x:.6}"));
        let tag = if r.pass == Some(true) { "PASS" } else { "FAIL" };
        lines.push(format!(
            "{tag} {} estimate={:.6}{reference}{tol}",
            r.name, r.estimate
        ));
    }
    lines.push(format!(
        "{}: {}",
        report.experiment,
        if report.passed() { "PASS" } else { "FAIL" }
    ));
    lines.join("\n")
}

pub fn run(a: &ExpArgs) -> Outcome {
    let cfg = build_config(a)?;
    let report = run_experiment(&cfg)?;
    let prov = provenance(&cfg);
    let head = header(cfg.seed, &prov);
    let name = cfg.experiment.name();
    let io = |e: std::io::Error| CliError::Failure(e.to_string());

    let mut csv = Sink::new(a.common.out.as_deref(), &format!("{name}.csv"))?;
    let to_file = csv.is_file();
    writeln!(csv, "{head}").map_err(io)?;
    report.write_csv(&mut csv)?;
    let csv_path = csv.finish()?;

    if to_file {
        let mut js = Sink::new(a.common.out.as_deref(), &format!("{name}.json"))?;
        let mut doc = Map::new();
        doc.insert("header".into(), json!(head));
        doc.insert("config".into(), prov);
        doc.insert(
            "report".into(),
            serde_json::to_value(&report).map_err(|e| CliError::Failure(e.to_string()))?,
        );
        serde_json::to_writer_pretty(&mut js, &Value::Object(doc))
            .map_err(|e| CliError::Failure(e.to_string()))?;
        writeln!(js).map_err(io)?;
        let json_path = js.finish()?;
        println!("{}", summary(&report));
        for p in csv_path.iter().chain(json_path.iter()) {
            println!("wrote {}", p.display());
        }
    } else {
        eprintln!("{}", summary(&report));
    }
    eprintln!("wall clock: {:.2?}", report.wall_clock);
    Ok(report.passed())
}
