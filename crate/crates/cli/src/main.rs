mod args;
mod output;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use qgraph::coeff::IntegrabilityExponent;
use qgraph::eig::EigenOptions;
use qgraph::graph::families;
use qgraph::spectral::{
    ap_check, inf_spectrum, level_forms, persson_limit, positive_solution, sobolev_constant, ApOutcome,
    PerssonSchedule,
};
use qgraph::verify::{covering_level, run_suite, VerifyCase, VerifyOptions};
use qgraph::{
    validate_hypotheses, BoundaryCondition, CoeffError, CoefficientField, EigenError, Exhaustion, FemError,
    HypothesisReport, MetricGraph, SpectralError, SpectralOptions,
};

use args::{Cli, Command, Common};
use output::Table;

/// Process outcome other than success.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn hypothesis(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<SpectralError> for Failure {
    fn from(e: SpectralError) -> Self {
        let not_positive = |c: &CoeffError| matches!(c, CoeffError::NotPositive { .. } | CoeffError::Integrability { .. });
        let code = match &e {
            SpectralError::Eigen(EigenError::NotConverged { .. } | EigenError::Factorization { .. })
            | SpectralError::Monotonicity(_)
            | SpectralError::NegativeNode { .. } => 3,
            SpectralError::NoAdmissibleDelta { .. } => 2,
            SpectralError::Coeff(c) | SpectralError::Fem(FemError::Coeff(c)) if not_positive(c) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<qgraph::Error> for Failure {
    fn from(e: qgraph::Error) -> Self {
        match e {
            qgraph::Error::Spectral(s) => s.into(),
            qgraph::Error::Eigen(s) => SpectralError::Eigen(s).into(),
            qgraph::Error::Fem(s) => SpectralError::Fem(s).into(),
            qgraph::Error::Coeff(s) => SpectralError::Coeff(s).into(),
            qgraph::Error::Graph(s) => SpectralError::Graph(s).into(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(format!("I/O error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::usage(format!("CSV output: {e}"))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<MetricGraph, Failure> {
    MetricGraph::from_json(&read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_field(path: Option<&Path>, g: &MetricGraph) -> Result<CoefficientField, Failure> {
    match path {
        None => Ok(CoefficientField::free(g)),
        Some(p) => CoefficientField::from_json(&read(p)?, g).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
    }
}

fn parse_eta(s: &str) -> Result<IntegrabilityExponent, Failure> {
    match s {
        "inf" | "infinity" => Ok(IntegrabilityExponent::Infinite),
        _ => match s.parse::<f64>() {
            Ok(v) if v >= 1.0 => Ok(IntegrabilityExponent::Finite(v)),
            _ => Err(Failure::usage(format!("--eta must be a number ≥ 1 or `inf`, got `{s}`"))),
        },
    }
}

/// Loaded inputs shared by the single-graph commands.
struct Setup {
    graph: MetricGraph,
    field: CoefficientField,
    opts: SpectralOptions,
    hypotheses: HypothesisReport,
}

fn check_numbers(c: &Common) -> Result<(), Failure> {
    if !(c.h > 0.0 && c.h.is_finite()) {
        return Err(Failure::usage(format!("--h must be positive, got {}", c.h)));
    }
    if !(c.tol > 0.0 && c.tol.is_finite()) {
        return Err(Failure::usage(format!("--tol must be positive, got {}", c.tol)));
    }
    if !(c.eig_tol > 0.0 && c.eig_tol.is_finite()) {
        return Err(Failure::usage(format!("--eig-tol must be positive, got {}", c.eig_tol)));
    }
    Ok(())
}

fn setup(c: &Common, compact_level: Option<usize>) -> Result<Setup, Failure> {
    check_numbers(c)?;
    let eta = parse_eta(&c.eta)?;
    let mut graph = load_graph(&c.graph)?;
    if let Some(id) = &c.root {
        let v = graph
            .vertex_index(id)
            .ok_or_else(|| Failure::usage(format!("root `{id}` is not a vertex of {}", c.graph.display())))?;
        graph = graph.with_root(v);
    }
    let field = load_field(c.coeffs.as_deref(), &graph)?;
    let compact = match compact_level {
        Some(n) => Exhaustion::build(&graph, graph.root(), n)
            .map_err(|e| Failure::usage(e.to_string()))?
            .level(n)
            .to_vec(),
        None => Vec::new(),
    };
    let hypotheses = validate_hypotheses(&graph, &field, &compact, eta, 64);
    let opts = SpectralOptions {
        h: c.h,
        tol: c.tol,
        bc: if c.no_boundary_dirichlet {
            BoundaryCondition::Free
        } else {
            BoundaryCondition::Dirichlet
        },
        eig: EigenOptions {
            tol: c.eig_tol,
            ..Default::default()
        },
    };
    Ok(Setup {
        graph,
        field,
        opts,
        hypotheses,
    })
}

/// Refuses to run when one of `clauses` fails, unless overridden.
fn gate(s: &Setup, c: &Common, clauses: &[u8]) -> Result<Vec<String>, Failure> {
    let failed: Vec<String> = s
        .hypotheses
        .failures()
        .filter(|cl| clauses.contains(&cl.number))
        .map(|cl| format!("hypothesis clause ({}) failed: {}", cl.number, cl.detail))
        .collect();
    if failed.is_empty() {
        return Ok(Vec::new());
    }
    if !c.override_hypotheses {
        return Err(Failure::hypothesis(format!(
            "{}\nrerun with --override to proceed anyway",
            failed.join("\n")
        )));
    }
    for f in &failed {
        eprintln!("warning: {f} (overridden)");
    }
    Ok(failed)
}

fn exhaustion(s: &Setup, max_level: usize) -> Result<Exhaustion, Failure> {
    Exhaustion::build(&s.graph, s.graph.root(), max_level.max(1)).map_err(|e| Failure::usage(e.to_string()))
}

fn init_workers(workers: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = workers {
        if n == 0 {
            return Err(Failure::usage("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    Ok(())
}

fn f(v: f64) -> String {
    format!("{v:e}")
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spectrum {
            common,
            levels,
            dump_matrices,
        } => {
            init_workers(common.workers)?;
            let s = setup(&common, None)?;
            let overridden = gate(&s, &common, &[1, 3])?;
            let top = covering_level(&s.graph, s.graph.root()).max(1);
            let ex = exhaustion(&s, levels.iter().copied().max().unwrap_or(top))?;
            let levels = if levels.is_empty() {
                (1..=top).filter(|&n| !ex.level(n).is_empty()).collect()
            } else {
                levels
            };
            if let Some(dir) = &dump_matrices {
                for &n in &levels {
                    let forms = level_forms(&s.graph, &s.field, &ex, n, &s.opts)?;
                    forms.dump(&dir.join(format!("level_{n}")))?;
                }
            }
            let report = inf_spectrum(&s.graph, &s.field, &ex, &levels, &s.opts)?;
            let mut t = Table::open(common.out.as_deref())?;
            t.header("spectrum", &common, &[("levels", list(&levels))], &s.hypotheses, &overridden)?;
            t.columns(&["n", "lambda", "residual", "dofs", "iterations"])?;
            for r in &report.rows {
                if common.verbose {
                    eprintln!("Γ_{}: λ₁ = {} ({} DOFs, {} restarts)", r.n, r.lambda, r.dofs, r.iterations);
                }
                t.row(&[r.n.to_string(), f(r.lambda), f(r.residual), r.dofs.to_string(), r.iterations.to_string()])?;
            }
            t.comment(&format!("estimate={}", f(report.estimate)))?;
            if let Some(p) = report.error_proxy {
                t.comment(&format!("error_proxy={}", f(p)))?;
            }
            for w in &report.warnings {
                t.comment(&format!("warning: {w}"))?;
                eprintln!("warning: {w}");
            }
            t.finish()
        }
        Command::Persson { common, levels, outer } => {
            let schedule = PerssonSchedule { levels, outer };
            schedule
                .validate(usize::MAX)
                .map_err(|e| Failure::usage(e.to_string()))?;
            init_workers(common.workers)?;
            let s = setup(&common, None)?;
            let overridden = gate(&s, &common, &[1, 2, 3, 4])?;
            let ex = exhaustion(&s, *schedule.outer.last().expect("validated"))?;
            let trace = persson_limit(&s.graph, &s.field, &ex, &schedule, &s.opts)?;
            let mut t = Table::open(common.out.as_deref())?;
            t.header(
                "persson",
                &common,
                &[("levels", list(&schedule.levels)), ("outer", list(&schedule.outer))],
                &s.hypotheses,
                &overridden,
            )?;
            t.columns(&["n", "N", "lambda", "residual", "dofs"])?;
            for r in &trace.rows {
                t.row(&[r.n.to_string(), r.outer.to_string(), f(r.lambda), f(r.residual), r.dofs.to_string()])?;
            }
            for l in &trace.levels {
                t.comment(&format!(
                    "level n={} last_N={} last={} extrapolated={}",
                    l.n,
                    l.last_outer,
                    f(l.last),
                    f(l.extrapolated)
                ))?;
            }
            t.comment(&format!("estimate={}", f(trace.estimate)))?;
            t.comment(&format!("bracket=[{}, {}]", f(trace.bracket.0), f(trace.bracket.1)))?;
            for w in &trace.warnings {
                t.comment(&format!("warning: {w}"))?;
                eprintln!("warning: {w}");
            }
            if common.verbose {
                eprintln!("estimate {} in [{}, {}]", trace.estimate, trace.bracket.0, trace.bracket.1);
            }
            t.finish()
        }
        Command::ApCheck { common, lambda, level } => {
            let s = setup(&common, None)?;
            let overridden = gate(&s, &common, &[1, 3])?;
            let ex = exhaustion(&s, level)?;
            let outcome = ap_check(&s.graph, &s.field, &ex, lambda, level, &s.opts)?;
            let mut t = Table::open(common.out.as_deref())?;
            t.header(
                "ap-check",
                &common,
                &[("lambda", lambda.to_string()), ("level", level.to_string())],
                &s.hypotheses,
                &overridden,
            )?;
            t.columns(&["outcome", "lambda", "lambda1", "level", "min_value", "max_value", "max_kirchhoff_residual"])?;
            let (min, max, kirchhoff) = match &outcome {
                ApOutcome::Certificate(c) => (f(c.min_val), f(c.max_val), f(c.max_kirchhoff_residual())),
                _ => (String::new(), String::new(), String::new()),
            };
            t.row(&[
                outcome.kind().to_string(),
                f(lambda),
                f(outcome.lambda1()),
                level.to_string(),
                min,
                max,
                kirchhoff,
            ])?;
            if common.verbose {
                eprintln!("{}: λ = {lambda}, λ₁(Γ_{level}) = {}", outcome.kind(), outcome.lambda1());
            }
            t.finish()
        }
        Command::PositiveSolution { common, lambda, level } => {
            let s = setup(&common, None)?;
            let overridden = gate(&s, &common, &[1, 3])?;
            let ex = exhaustion(&s, level)?;
            let cert = positive_solution(&s.graph, &s.field, &ex, level, lambda, &s.opts)?;
            let mut t = Table::open(common.out.as_deref())?;
            t.header(
                "positive-solution",
                &common,
                &[("lambda", lambda.to_string()), ("level", level.to_string())],
                &s.hypotheses,
                &overridden,
            )?;
            t.columns(&["kind", "id", "offset", "value", "constrained"])?;
            let mesh = cert.mesh();
            for (i, (loc, v)) in mesh.nodes().iter().zip(&cert.values).enumerate() {
                let (kind, id, offset) = match *loc {
                    qgraph::fem::NodeLocation::Vertex(v) => ("vertex", s.graph.vertex_id(v).to_string(), String::new()),
                    qgraph::fem::NodeLocation::Interior { edge, offset } | qgraph::fem::NodeLocation::Cut { edge, offset } => {
                        ("edge", s.graph.edge(edge).id.clone(), f(offset))
                    }
                };
                t.row(&[kind.into(), id, offset, f(*v), mesh.is_constrained(i).to_string()])?;
            }
            t.comment(&format!(
                "lambda1={} min={} max={} max_kirchhoff_residual={}",
                f(cert.lambda1),
                f(cert.min_val),
                f(cert.max_val),
                f(cert.max_kirchhoff_residual())
            ))?;
            t.finish()
        }
        Command::Sobolev { common, epsilon } => {
            let s = setup(&common, None)?;
            let overridden = gate(&s, &common, &[1, 2, 3])?;
            let mut t = Table::open(common.out.as_deref())?;
            let eps_echo = epsilon.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
            t.header("sobolev", &common, &[("epsilon", eps_echo)], &s.hypotheses, &overridden)?;
            t.columns(&["epsilon", "delta", "c", "C"])?;
            for &e in &epsilon {
                let est = sobolev_constant(&s.graph, &s.field, e)?;
                t.row(&[f(est.epsilon), f(est.delta), f(est.c), f(est.c_epsilon)])?;
            }
            t.finish()
        }
        Command::Validate { common, compact_level } => {
            let s = setup(&common, compact_level)?;
            let mut t = Table::open(common.out.as_deref())?;
            let echo = compact_level.map(|n| n.to_string()).unwrap_or_else(|| "none".into());
            t.header("validate", &common, &[("compact-level", echo)], &s.hypotheses, &[])?;
            t.columns(&["clause", "passed", "detail"])?;
            for cl in &s.hypotheses.clauses {
                t.row(&[cl.number.to_string(), cl.passed.to_string(), cl.detail.clone()])?;
            }
            t.finish()?;
            let failed: Vec<String> = s
                .hypotheses
                .failures()
                .map(|cl| format!("clause ({}) failed: {}", cl.number, cl.detail))
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::hypothesis(failed.join("\n")))
            }
        }
        Command::Verify {
            graph,
            coeffs,
            h,
            tol,
            seed,
            workers,
            out,
            verbose,
        } => {
            init_workers(workers)?;
            let cases = verify_cases(&graph, coeffs.as_deref())?;
            let opts = VerifyOptions {
                seed,
                spectral: SpectralOptions {
                    h,
                    tol,
                    ..Default::default()
                },
                ..Default::default()
            };
            let report = run_suite(&cases, &opts)?;
            let mut t = Table::open(out.as_deref())?;
            t.verify_header(&graph, coeffs.as_deref(), h, tol, seed, workers)?;
            t.columns(&["case", "property", "passed", "measured"])?;
            for c in &report.checks {
                if verbose || !c.passed {
                    eprintln!("{} {}: {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.case, c.property, c.measured);
                }
                t.row(&[c.case.clone(), c.property.to_string(), c.passed.to_string(), c.measured.clone()])?;
            }
            t.finish()?;
            let failed = report.failures().count();
            if failed == 0 {
                Ok(())
            } else {
                Err(Failure::usage(format!("{failed} of {} property checks failed", report.checks.len())))
            }
        }
    }
}

fn verify_cases(graphs: &[std::path::PathBuf], coeffs: Option<&Path>) -> Result<Vec<VerifyCase>, Failure> {
    let builtin = || {
        [
            ("interval", families::path(1, 1.0)),
            ("star3", families::star(3, 1.0)),
            ("tree", families::binary_tree(3, 1.0)),
            ("ladder", families::ladder(4, 1.0)),
            ("halfline8", families::path(8, 1.0)),
        ]
        .into_iter()
        .map(|(n, g)| (n.to_string(), g))
        .collect::<Vec<_>>()
    };
    let hosts = if graphs.is_empty() {
        builtin()
    } else {
        graphs
            .iter()
            .map(|p| Ok((p.display().to_string(), load_graph(p)?)))
            .collect::<Result<Vec<_>, Failure>>()?
    };
    hosts
        .into_iter()
        .map(|(name, graph)| {
            let field = load_field(coeffs, &graph)?;
            Ok(VerifyCase { name, graph, field })
        })
        .collect()
}

fn list(v: &[usize]) -> String {
    v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
