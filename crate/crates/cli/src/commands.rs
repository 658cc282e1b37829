use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use qdrift_core::format::sci;
use qdrift_core::phase_est::{self, PEQuery, PeMethod, PeRow, TrotterBitModel};
use qdrift_core::suite::{self, SuiteCase, SuiteConfig};
use qdrift_core::trotter::{self, CostQuery, CostReport, ExponentConvention};
use qdrift_core::{qdrift, Hamiltonian, WeightProfile};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{
    Command, CompileArgs, CostArgs, ExponentArg, Format, PhaseEstArgs, ProfileArgs, SweepArgs,
    TrotterModelArg, TruncateArgs, VerifyArgs, OUT_DIR_ENV,
};

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: io::Error },
    Core(qdrift_core::Error),
    Argument(String),
    /// A rigorous check failed.
    Violation(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Argument(msg) => f.write_str(msg),
            CliError::Violation(msg) => write!(f, "verification failed: {msg}"),
        }
    }
}

impl From<qdrift_core::Error> for CliError {
    fn from(e: qdrift_core::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Compile(a) => compile(a),
        Command::Cost(a) => cost(a),
        Command::Sweep(a) => sweep(a),
        Command::PhaseEst(a) => phase_est(a),
        Command::Verify(a) => verify(a),
        Command::Truncate(a) => truncate(a),
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Argument(format!("--{name} must be a positive number, got {v}")))
    }
}

fn read_ham(path: &Path) -> Result<Hamiltonian> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Hamiltonian::parse(&text)?)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn default_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| match i {
            0 => lo,
            _ if i == points - 1 => hi,
            _ => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
        })
        .collect()
}

fn check_grid(name: &str, lo: f64, hi: f64, points: usize) -> Result<()> {
    positive(&format!("{name}-min"), lo)?;
    positive(&format!("{name}-max"), hi)?;
    if points == 0 {
        return Err(CliError::Argument("--points must be at least 1".into()));
    }
    if lo > hi {
        return Err(CliError::Argument(format!("--{name}-min must not exceed --{name}-max")));
    }
    Ok(())
}

fn compile(a: CompileArgs) -> Result<()> {
    positive("t", a.t)?;
    positive("eps", a.eps)?;
    let h = read_ham(&a.ham)?;
    let circuit = if a.controlled {
        qdrift::compile_controlled(&h, a.t, a.eps, a.seed, a.mode.into())?
    } else {
        qdrift::compile(&h, a.t, a.eps, a.seed, a.mode.into())?
    };
    let path = a.out.unwrap_or_else(|| {
        let stem = a.ham.file_stem().and_then(|s| s.to_str()).unwrap_or("circuit");
        default_dir().join(format!("{stem}-seed{}.circ", a.seed))
    });
    write_file(&path, &circuit.to_text())?;
    let summary = json!({
        "path": path.display().to_string(),
        "N": circuit.meta.n_gates,
        "tau": circuit.angle(),
        "lambda": circuit.meta.lambda,
        "n_qubits": circuit.meta.n_qubits,
        "controlled": a.controlled,
    });
    emit(None, &json_text(&summary))
}

/// The profile all methods are costed on. Files are truncated by up to
/// `eps` of weight first unless disabled.
fn resolve_profile(p: &ProfileArgs, eps: f64) -> Result<WeightProfile> {
    if let Some(path) = &p.ham {
        let h = read_ham(path)?;
        let h = if p.no_truncate { h } else { h.truncate(eps)? };
        return Ok(h.profile());
    }
    match (p.n_terms, p.max_weight, p.lambda) {
        (Some(l), Some(big), Some(lambda)) => {
            positive("Lambda", big)?;
            positive("lambda", lambda)?;
            Ok(WeightProfile::new(l, lambda, big)?)
        }
        _ => Err(CliError::Argument(
            "give either --ham or all of --L, --Lambda and --lambda".into(),
        )),
    }
}

fn convention(p: &ProfileArgs) -> ExponentConvention {
    match p.exponent {
        ExponentArg::PerTerm => ExponentConvention::PerTerm,
        ExponentArg::Whole => ExponentConvention::WholeHamiltonian,
    }
}

fn report_json(r: &CostReport, q: &CostQuery) -> Value {
    json!({
        "method": r.method.name(),
        "order": r.method.order(),
        "variant": r.method.variant().map(|v| v.as_str()),
        "r": r.r.and_then(|c| c.exact()),
        "log10_r": r.r.map(|c| c.log10()),
        "gates": r.gates.exact(),
        "log10_gates": r.gates.log10(),
        "bound": r.bound,
        "t": q.t,
        "eps": q.eps,
        "L": q.profile.n_terms,
        "Lambda": q.profile.max_weight,
        "lambda": q.profile.lambda,
    })
}

fn cost_rows(rows: &[(CostQuery, Vec<CostReport>)], format: Format) -> (String, Vec<Value>) {
    let mut csv = format!("{}\n", trotter::CSV_HEADER);
    let mut json_rows = Vec::new();
    for (q, reports) in rows {
        for r in reports {
            match format {
                Format::Csv => {
                    csv.push_str(&r.csv_row(q));
                    csv.push('\n');
                }
                Format::Json => json_rows.push(report_json(r, q)),
            }
        }
    }
    (csv, json_rows)
}

fn cost(a: CostArgs) -> Result<()> {
    positive("t", a.t)?;
    positive("eps", a.eps)?;
    let profile = resolve_profile(&a.profile, a.eps)?;
    let query = CostQuery::new(profile, a.t, a.eps)?.with_convention(convention(&a.profile));
    let rows = vec![(query, trotter::cost_table(&query)?)];
    let (csv, json_rows) = cost_rows(&rows, a.output.format);
    let text = match a.output.format {
        Format::Csv => csv,
        Format::Json => json_text(&Value::Array(json_rows)),
    };
    emit(a.output.out.as_deref(), &text)
}

fn sweep(a: SweepArgs) -> Result<()> {
    positive("eps", a.eps)?;
    check_grid("t", a.t_min, a.t_max, a.points)?;
    let profile = resolve_profile(&a.profile, a.eps)?;
    let base = CostQuery::new(profile, a.t_min, a.eps)?.with_convention(convention(&a.profile));
    let rows = log_grid(a.t_min, a.t_max, a.points)
        .into_par_iter()
        .map(|t| {
            let q = base.at_time(t)?;
            Ok((q, trotter::cost_table(&q)?))
        })
        .collect::<std::result::Result<Vec<_>, qdrift_core::Error>>()?;
    let crossover = if a.crossover && a.t_min < a.t_max {
        trotter::crossover_time(profile, a.eps, a.t_min, a.t_max)?
    } else {
        None
    };
    let (mut csv, json_rows) = cost_rows(&rows, a.output.format);
    let text = match a.output.format {
        Format::Csv => {
            if let Some(ts) = crossover {
                csv.push_str(&format!(
                    "crossover,,,,,,{},{},{},{},{}\n",
                    sci(ts),
                    sci(a.eps),
                    profile.n_terms,
                    sci(profile.max_weight),
                    sci(profile.lambda)
                ));
            }
            csv
        }
        Format::Json => {
            let mut obj = json!({ "rows": json_rows });
            if a.crossover {
                obj["crossover_t"] = json!(crossover);
            }
            json_text(&obj)
        }
    };
    emit(a.output.out.as_deref(), &text)
}

fn phase_est(a: PhaseEstArgs) -> Result<()> {
    positive("Lambda", a.max_weight)?;
    positive("lambda", a.lambda)?;
    positive("delta-e", a.delta_e)?;
    let grid = if a.pf.is_empty() {
        check_grid("pf", a.pf_min, a.pf_max, a.points)?;
        log_grid(a.pf_min, a.pf_max, a.points)
    } else {
        let mut g = a.pf.clone();
        g.sort_by(f64::total_cmp);
        g
    };
    let profile = WeightProfile::new(a.n_terms, a.lambda, a.max_weight)?;
    let model = match a.trotter_model {
        TrotterModelArg::ClosedForm => TrotterBitModel::ClosedForm,
        TrotterModelArg::Solver => TrotterBitModel::ExactSolver,
    };
    // validate the whole grid before any optimization runs
    let queries = grid
        .iter()
        .map(|&p| PEQuery::new(profile, a.delta_e, p))
        .collect::<qdrift_core::Result<Vec<_>>>()?;
    let filters = match a.overlap {
        Some(f) => Some(
            grid.iter()
                .map(|&p| phase_est::repetition_filter(f, p, a.repetitions))
                .collect::<qdrift_core::Result<Vec<_>>>()?,
        ),
        None => None,
    };
    let rows = queries
        .par_iter()
        .map(|q| {
            let qd = phase_est::optimized_plan_with(PeMethod::QDrift, q, model)?;
            let tr = phase_est::optimized_plan_with(PeMethod::Trotter, q, model)?;
            let qd_int = phase_est::integer_optimum(PeMethod::QDrift, q)?.total;
            let tr_int = phase_est::integer_optimum(PeMethod::Trotter, q)?.total;
            Ok(((qd, qd_int), (tr, tr_int)))
        })
        .collect::<qdrift_core::Result<Vec<((PeRow, f64), (PeRow, f64))>>>()?;

    let text = match a.output.format {
        Format::Csv => {
            let mut out = format!("{}\n", phase_est::CSV_HEADER);
            for ((qd, _), (tr, _)) in &rows {
                let ratio = tr.plan.total / qd.plan.total;
                for row in [qd, tr] {
                    out.push_str(&row.csv_row(ratio));
                    out.push('\n');
                }
            }
            if let Some(fs) = &filters {
                for (p, v) in grid.iter().zip(fs) {
                    eprintln!("{}", filter_note(*p, a.repetitions, v));
                }
            }
            out
        }
        Format::Json => {
            let mut out = Vec::new();
            for (i, ((qd, qd_int), (tr, tr_int))) in rows.iter().enumerate() {
                let ratio = tr.plan.total / qd.plan.total;
                let filter = filters.as_ref().map(|fs| fs[i]);
                for (row, int_total) in [(qd, qd_int), (tr, tr_int)] {
                    out.push(json!({
                        "filter": filter,
                        "method": row.method.as_str(),
                        "P_f": row.p_total,
                        "p_f_opt": row.plan.p_f,
                        "eps_tot": row.plan.eps_tot,
                        "m": row.plan.m,
                        "total_gates": row.plan.total,
                        "closed_form_gates": row.optimum.closed_form_total,
                        "ratio": ratio,
                        "smooth_optimum_gates": row.optimum.total,
                        "closed_form_p_f": row.optimum.closed_form_p_f,
                        "integer_depth_optimum_gates": int_total,
                    }));
                }
            }
            json_text(&Value::Array(out))
        }
    };
    emit(a.output.out.as_deref(), &text)
}

fn filter_note(p_f: f64, m: u64, v: &phase_est::FilterVerdict) -> String {
    let min = match v.min_repetitions {
        Some(k) => format!("minimal M = {k}"),
        None => "infeasible for every M".to_string(),
    };
    let verdict = if v.feasible { "feasible" } else { "not feasible" };
    format!("filter at P_f={p_f:e}: M={m} {verdict} (margin {:.3e}), {min}", v.margin)
}

fn verify(a: VerifyArgs) -> Result<()> {
    positive("t", a.t)?;
    if !(a.slope_min < a.slope_max) {
        return Err(CliError::Argument("--slope-min must be below --slope-max".into()));
    }
    let mut config = SuiteConfig {
        seed: a.seed,
        negative_control: a.negative_control,
        slope_window: (a.slope_min, a.slope_max),
        ..SuiteConfig::default()
    };
    if let Some(path) = &a.ham {
        let h = read_ham(path)?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("input");
        config.cases = vec![SuiteCase::new(name, h, a.t)];
    }
    let report = suite::run(&config)?;
    print!("{}", report.render());

    if let Some(out) = &a.output.out {
        let text = match a.output.format {
            Format::Csv => {
                let mut s = format!("case,{}\n", qdrift_core::channel::BoundTable::CSV_HEADER);
                for (name, table) in &report.bound_tables {
                    for line in table.to_csv().lines().skip(1) {
                        s.push_str(&format!("{name},{line}\n"));
                    }
                }
                s
            }
            Format::Json => json_text(&serde_json::to_value(&report).expect("report serializes")),
        };
        write_file(out, &text)?;
    }

    if report.ok(a.strict) {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .failures()
            .filter(|c| c.kind == suite::CheckKind::Rigorous || a.strict)
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        Err(CliError::Violation(failed.join("; ")))
    }
}

fn truncate(a: TruncateArgs) -> Result<()> {
    positive("eps", a.eps)?;
    let h = read_ham(&a.ham)?.truncate(a.eps)?;
    emit(a.out.as_deref(), &h.serialize())
}
