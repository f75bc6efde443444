use std::fmt;

use percap_core::lifting::VALIDATED_KAPPA;
use percap_core::mc::{
    empirical_threshold, estimate_feasibility, Method, ThresholdScan, EXHAUSTIVE_CAP,
};
use percap_core::solver::solve_fixed_point;
use percap_core::{
    capacity, capacity_curve, gauss_hermite_rule, kappa_c, psi_q, CapacityResult, Error, LiftLevel,
    QuadratureRule, SolverConfig,
};

use crate::args::{
    CapacityArgs, Command, CurveArgs, Format, KappaCArgs, McArgs, MethodArg, NumericArgs,
    OutputArgs, SimulateArgs, TableArgs, ThresholdArgs, UniquenessArgs,
};
use crate::output::{
    capacity_csv, estimates_csv, kappa_c_csv, level_table_csv, quantity_table_csv, scan_csv,
    threshold_csv, KappaCResult, OutputRecord, ResultItem, ScanPoint,
};

/// Thresholds of the full-level parameter table.
pub const TABLE2_KAPPA: [f64; 10] = [-0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2];

/// Thresholds of the level-progression table.
pub const TABLE3_KAPPA: [f64; 9] = [-0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2];

/// Largest grid `curve` will evaluate.
const MAX_CURVE_POINTS: usize = 100_000;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => 1,
            Failure::Core(e) => core_exit_code(e),
        }
    }
}

pub fn core_exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => 1,
        Error::EnumerationCap { .. } | Error::NoCrossing { .. } => 3,
        _ => 2,
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) => f.write_str(m),
            Failure::Core(e) => {
                write!(f, "{e}")?;
                match e {
                    Error::FixedPointNotFound { scan, .. } => {
                        writeln!(f, "\nq2s,residual")?;
                        for (q, r) in scan {
                            writeln!(f, "{q},{r}")?;
                        }
                    }
                    Error::NoCrossing { curve, .. } => {
                        writeln!(f, "\nm,rate")?;
                        for (m, r) in curve {
                            writeln!(f, "{m},{r}")?;
                        }
                    }
                    _ => {}
                }
                Ok(())
            }
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// What a command produced: the record, its CSV rendering, and the exit code
/// (non-zero when some grid points failed).
pub struct Report {
    pub record: OutputRecord,
    pub csv: String,
    pub code: i32,
    pub output: OutputArgs,
}

impl Report {
    pub fn render(&self) -> String {
        match self.output.format {
            Format::Json => self.record.to_json(),
            Format::Csv => self.csv.clone(),
        }
    }
}

pub fn execute(cmd: Command) -> Result<Report, Failure> {
    match cmd {
        Command::Capacity(a) => capacity_cmd(a),
        Command::Curve(a) => curve_cmd(a),
        Command::Table(a) => table_cmd(a),
        Command::KappaC(a) => kappa_c_cmd(a),
        Command::Uniqueness(a) => uniqueness_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Threshold(a) => threshold_cmd(a),
    }
}

fn numerics(n: &NumericArgs) -> Result<(SolverConfig, QuadratureRule), Failure> {
    let cfg = SolverConfig::default().with_tol(n.tol);
    cfg.validate()?;
    Ok((cfg, gauss_hermite_rule(n.nodes)?))
}

fn numeric_params(rec: &mut OutputRecord, n: &NumericArgs) {
    rec.param("nodes", n.nodes);
    rec.param("tol", n.tol);
}

fn check_range(kappa: f64, level: LiftLevel, allow: bool) -> Result<(), Failure> {
    if !kappa.is_finite() {
        return Err(Failure::Usage(format!("kappa must be finite, got {kappa}")));
    }
    if level == LiftLevel::L2Full && !allow && !VALIDATED_KAPPA.contains(&kappa) {
        return Err(Failure::Usage(format!(
            "kappa = {kappa} is outside the validated range [{}, {}] for level 2f; \
             pass --allow-extrapolation to evaluate it anyway",
            VALIDATED_KAPPA.start(),
            VALIDATED_KAPPA.end()
        )));
    }
    Ok(())
}

fn note_result(rec: &mut OutputRecord, r: &CapacityResult) {
    if r.extrapolated {
        rec.warnings.push(format!(
            "kappa = {} lies outside the validated range; result is an extrapolation",
            r.kappa
        ));
    }
    if let Some(s) = r.sign_changes.filter(|&s| s != 1) {
        rec.warnings.push(format!(
            "kappa = {}: {s} sign changes of q - psi_q(q) on the scan; the first was taken \
             (a higher --nodes may remove spurious crossings at large q)",
            r.kappa
        ));
    }
}

fn capacity_cmd(a: CapacityArgs) -> Result<Report, Failure> {
    check_range(a.kappa, a.level, a.allow_extrapolation)?;
    let (cfg, rule) = numerics(&a.numeric)?;
    let r = capacity(a.kappa, a.level, &cfg, &rule)?;
    let mut rec = OutputRecord::new("capacity");
    rec.param("kappa", a.kappa);
    rec.param("level", a.level.as_str());
    numeric_params(&mut rec, &a.numeric);
    note_result(&mut rec, &r);
    let csv = capacity_csv([&r]);
    rec.results.push(ResultItem::Capacity(r));
    Ok(Report {
        record: rec,
        csv,
        code: 0,
        output: a.output,
    })
}

/// `kappa_min, kappa_min + step, …` up to `kappa_max`, each value rounded to
/// 12 decimals so that grid points land on their decimal spelling.
pub fn kappa_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, Failure> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) || step <= 0.0 || max < min {
        return Err(Failure::Usage(format!(
            "need finite kappa-min <= kappa-max and step > 0, got {min}, {max}, {step}"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() + 1.0;
    if count > MAX_CURVE_POINTS as f64 {
        return Err(Failure::Usage(format!(
            "grid of {count} points exceeds the limit of {MAX_CURVE_POINTS}"
        )));
    }
    Ok((0..count as usize)
        .map(|i| ((min + i as f64 * step) * 1e12).round() / 1e12 + 0.0)
        .collect())
}

fn curve_cmd(a: CurveArgs) -> Result<Report, Failure> {
    let grid = kappa_grid(a.kappa_min, a.kappa_max, a.step)?;
    for &k in &grid {
        check_range(k, a.level, a.allow_extrapolation)?;
    }
    let (cfg, rule) = numerics(&a.numeric)?;
    let mut rec = OutputRecord::new("curve");
    rec.param("kappa_min", a.kappa_min);
    rec.param("kappa_max", a.kappa_max);
    rec.param("step", a.step);
    rec.param("level", a.level.as_str());
    numeric_params(&mut rec, &a.numeric);
    let mut ok = Vec::new();
    let mut code = 0;
    for (k, res) in grid
        .iter()
        .zip(capacity_curve(&grid, a.level, &cfg, &rule)?)
    {
        match res {
            Ok(r) => {
                note_result(&mut rec, &r);
                ok.push(r);
            }
            Err(e) => {
                rec.warnings.push(format!("kappa = {k}: {e}"));
                code = code.max(core_exit_code(&e));
            }
        }
    }
    let csv = capacity_csv(&ok);
    rec.results = ok.into_iter().map(ResultItem::Capacity).collect();
    Ok(Report {
        record: rec,
        csv,
        code,
        output: a.output,
    })
}

fn collect_curve(
    grid: &[f64],
    level: LiftLevel,
    cfg: &SolverConfig,
    rule: &QuadratureRule,
) -> Result<Vec<CapacityResult>, Failure> {
    capacity_curve(grid, level, cfg, rule)?
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(Failure::Core)
}

fn table_cmd(a: TableArgs) -> Result<Report, Failure> {
    let (cfg, rule) = numerics(&a.numeric)?;
    let mut rec = OutputRecord::new("table");
    rec.param("table", a.which);
    numeric_params(&mut rec, &a.numeric);
    let (results, csv) = match a.which {
        1 => {
            let rows = LiftLevel::ALL
                .iter()
                .map(|&l| capacity(0.0, l, &cfg, &rule))
                .collect::<Result<Vec<_>, _>>()?;
            let csv = capacity_csv(&rows);
            (rows, csv)
        }
        2 => {
            let rows = collect_curve(&TABLE2_KAPPA, LiftLevel::L2Full, &cfg, &rule)?;
            let csv = quantity_table_csv(&rows);
            (rows, csv)
        }
        _ => {
            let by_level = LiftLevel::ALL
                .iter()
                .map(|&l| Ok((l, collect_curve(&TABLE3_KAPPA, l, &cfg, &rule)?)))
                .collect::<Result<Vec<_>, Failure>>()?;
            let csv = level_table_csv(&TABLE3_KAPPA, &by_level);
            (by_level.into_iter().flat_map(|(_, r)| r).collect(), csv)
        }
    };
    for r in &results {
        note_result(&mut rec, r);
    }
    rec.results = results.into_iter().map(ResultItem::Capacity).collect();
    Ok(Report {
        record: rec,
        csv,
        code: 0,
        output: a.output,
    })
}

fn kappa_c_cmd(a: KappaCArgs) -> Result<Report, Failure> {
    let cfg = SolverConfig::kappa_c().with_tol(a.tol);
    let root = kappa_c(&cfg)?;
    let res = KappaCResult {
        kappa_c: root.x,
        residual: root.residual,
        iterations: root.iterations,
    };
    let mut rec = OutputRecord::new("kappa-c");
    rec.param("tol", a.tol);
    rec.param("bracket_lo", cfg.bracket_lo);
    rec.param("bracket_hi", cfg.bracket_hi);
    let csv = kappa_c_csv(&res);
    rec.results.push(ResultItem::KappaC(res));
    Ok(Report {
        record: rec,
        csv,
        code: 0,
        output: a.output,
    })
}

fn uniqueness_cmd(a: UniquenessArgs) -> Result<Report, Failure> {
    check_range(a.kappa, LiftLevel::L2Full, a.allow_extrapolation)?;
    let (cfg, rule) = numerics(&a.numeric)?;
    let state = solve_fixed_point(|q| psi_q(q, a.kappa, &rule), &cfg)?;
    let mut rec = OutputRecord::new("uniqueness");
    rec.param("kappa", a.kappa);
    numeric_params(&mut rec, &a.numeric);
    rec.param("bracket_lo", cfg.bracket_lo);
    rec.param("bracket_hi", cfg.bracket_hi);
    rec.param("sign_changes", state.sign_changes);
    if state.converged {
        rec.param("q2s", state.q2s);
    }
    if state.sign_changes != 1 {
        rec.warnings.push(format!(
            "{} sign changes of q - psi_q(q) on the scan",
            state.sign_changes
        ));
    }
    let points: Vec<ScanPoint> = state
        .scan
        .iter()
        .map(|&(q, r)| ScanPoint {
            kappa: a.kappa,
            q2s: q,
            residual: r,
        })
        .collect();
    let csv = scan_csv(&points);
    rec.results = points.into_iter().map(ResultItem::Scan).collect();
    Ok(Report {
        record: rec,
        csv,
        code: 0,
        output: a.output,
    })
}

fn method(mc: &McArgs) -> Method {
    match mc.method {
        MethodArg::Exhaustive => Method::Exhaustive,
        MethodArg::Local => Method::LocalSearch {
            restarts: mc.restarts,
        },
    }
}

fn mc_params(rec: &mut OutputRecord, mc: &McArgs) {
    rec.param("n", mc.n);
    rec.param("kappa", mc.kappa);
    rec.param("trials", mc.trials);
    rec.param(
        "method",
        match mc.method {
            MethodArg::Exhaustive => "exhaustive",
            MethodArg::Local => "local_search",
        },
    );
    if mc.method == MethodArg::Local {
        rec.param("restarts", mc.restarts);
    }
    rec.param("seed", mc.seed);
}

fn check_mc(mc: &McArgs) -> Result<(), Failure> {
    if mc.n == 0 || mc.trials == 0 {
        return Err(Failure::Usage("--n and --trials must be at least 1".into()));
    }
    if !mc.kappa.is_finite() {
        return Err(Failure::Usage(format!(
            "kappa must be finite, got {}",
            mc.kappa
        )));
    }
    if mc.method == MethodArg::Exhaustive && mc.n > EXHAUSTIVE_CAP {
        return Err(Failure::Core(Error::EnumerationCap {
            n: mc.n,
            cap: EXHAUSTIVE_CAP,
        }));
    }
    Ok(())
}

fn lower_bound_warning(rec: &mut OutputRecord, mc: &McArgs) {
    if mc.method == MethodArg::Local {
        rec.warnings
            .push("local search is incomplete; rates are lower bounds".into());
    }
}

fn simulate_cmd(a: SimulateArgs) -> Result<Report, Failure> {
    check_mc(&a.mc)?;
    let ms: Vec<usize> = if a.m.is_empty() {
        a.alpha
            .iter()
            .map(|&al| {
                let m = (al * a.mc.n as f64).round();
                if al.is_finite() && m >= 1.0 {
                    Ok(m as usize)
                } else {
                    Err(Failure::Usage(format!(
                        "alpha = {al} gives no constraints at n = {}",
                        a.mc.n
                    )))
                }
            })
            .collect::<Result<_, _>>()?
    } else {
        a.m.clone()
    };
    if ms.contains(&0) {
        return Err(Failure::Usage("--m values must be at least 1".into()));
    }
    let est = estimate_feasibility(
        a.mc.n,
        &ms,
        a.mc.kappa,
        a.mc.trials,
        method(&a.mc),
        a.mc.seed,
    )?;
    let mut rec = OutputRecord::new("simulate");
    mc_params(&mut rec, &a.mc);
    rec.param("m", ms.clone());
    lower_bound_warning(&mut rec, &a.mc);
    let csv = estimates_csv(&est);
    rec.results = est.into_iter().map(ResultItem::Estimate).collect();
    Ok(Report {
        record: rec,
        csv,
        code: 0,
        output: a.output,
    })
}

fn threshold_cmd(a: ThresholdArgs) -> Result<Report, Failure> {
    check_mc(&a.mc)?;
    let scan = ThresholdScan::for_kappa(a.mc.n, a.mc.kappa)?;
    let t = empirical_threshold(
        a.mc.n,
        a.mc.kappa,
        a.mc.trials,
        method(&a.mc),
        a.mc.seed,
        scan,
    )?;
    let mut rec = OutputRecord::new("threshold");
    mc_params(&mut rec, &a.mc);
    rec.param("m_min", scan.m_min);
    rec.param("m_max", scan.m_max);
    rec.warnings.push(format!(
        "finite-size proxy at n = {}; not an estimate of the n -> infinity capacity",
        a.mc.n
    ));
    lower_bound_warning(&mut rec, &a.mc);
    let csv = threshold_csv(&t);
    rec.results.push(ResultItem::Threshold(t));
    Ok(Report {
        record: rec,
        csv,
        code: 0,
        output: a.output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_hit_decimal_points() {
        let g = kappa_grid(-0.4, 1.2, 0.2).unwrap();
        assert_eq!(g, TABLE3_KAPPA.to_vec());
        assert!(g[2].is_sign_positive());
        assert_eq!(kappa_grid(0.0, 0.0, 0.1).unwrap(), vec![0.0]);
        assert!(kappa_grid(1.0, 0.0, 0.1).is_err());
        assert!(kappa_grid(0.0, 1.0, 0.0).is_err());
        assert!(kappa_grid(0.0, 1.0, 1e-9).is_err());
    }

    #[test]
    fn error_classes() {
        assert_eq!(core_exit_code(&Error::InvalidArgument(String::new())), 1);
        assert_eq!(core_exit_code(&Error::EnumerationCap { n: 30, cap: 26 }), 3);
        assert_eq!(
            core_exit_code(&Error::DegenerateOrderParameter { q2s: 1.0, p2: 1.0 }),
            2
        );
    }
}
