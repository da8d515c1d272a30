//! End-to-end runs behind the `eifem` commands: single solves, convergence
//! studies and preconditioner benchmarks, with their file outputs.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{error_energy, error_flux, error_l2, format_error, ErrorReport, ErrorRow};
use crate::assembly::{assemble, BlockSparseSystem};
use crate::config::{Command, OutputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::flux::{conservation_report, recover_flux, RecoveredFlux};
use crate::linalg::{dot, norm2, write_matrix_market, write_vector};
use crate::mesh::{Rect, StructuredMesh};
use crate::problems::{circle_benchmark, ProblemSpec};
use crate::solver::{pcg_detailed, AuxPreconditioner, PcgOutcome, Preconditioner};
use crate::space::{DiscreteField, EnrichedSpace};
use crate::vtk::{write_flux, write_solution};

/// Everything computed for one mesh of one problem.
#[derive(Clone, Debug)]
pub struct CaseResult {
    pub row: ErrorRow,
    pub pcg: PcgOutcome,
    pub n_dofs: usize,
    pub n_nodal: usize,
    pub n_elements: usize,
    pub interface_elements: usize,
    pub setup_time: f64,
    pub solve_time: f64,
}

/// A solve that stopped at `maxit`.
#[derive(Clone, Debug, PartialEq)]
pub struct Unconverged {
    pub label: String,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
}

/// Files written and problems met by a run.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub unconverged: Vec<Unconverged>,
    /// Markdown rendering of the main table.
    pub table: String,
}

impl RunSummary {
    /// `NotConverged` for the first unconverged solve, if any. Outputs have
    /// been written either way.
    pub fn into_result(self) -> Result<Self> {
        match self.unconverged.first() {
            Some(u) => Err(Error::NotConverged {
                iterations: u.iterations,
                residual: u.residual,
                history: u.history.clone(),
            }),
            None => Ok(self),
        }
    }
}

pub fn problem_for(cfg: &RunConfig, minus: f64, plus: f64) -> Result<ProblemSpec> {
    match cfg.problem.as_str() {
        "circle" => circle_benchmark(minus, plus),
        other => Err(Error::Config(format!("unknown problem '{other}'"))),
    }
}

/// Assembly, preconditioner setup and PCG for one mesh.
pub fn solve_system<'m>(space: &EnrichedSpace<'m>, problem: &ProblemSpec, cfg: &RunConfig) -> Result<(BlockSparseSystem, PcgOutcome, f64, f64)> {
    let t0 = Instant::now();
    let system = assemble(space, problem, &cfg.assembly_params())?;
    let pre = AuxPreconditioner::new(&system, &cfg.aux_params())?;
    let setup = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let out = pcg_detailed(&system.matrix, &system.rhs, Some(&pre), &cfg.pcg_params())?;
    Ok((system, out, setup, t1.elapsed().as_secs_f64()))
}

/// Full pipeline on an `n × n` mesh: solve, recover the flux, measure errors.
pub fn run_case(problem: &ProblemSpec, n: usize, cfg: &RunConfig) -> Result<(CaseResult, CaseArtifacts)> {
    let start = Instant::now();
    let mesh = StructuredMesh::new(n, Rect::default())?;
    let space = EnrichedSpace::new(&mesh, problem.level_set.clone(), problem.beta)?;
    let (system, pcg, setup_time, solve_time) = solve_system(&space, problem, cfg)?;
    let field = system.field_from_dofs(&space, &pcg.x);
    let flux = recover_flux(&space, problem, &field, &cfg.assembly_params());
    let conservation = conservation_report(&mesh, &flux, &system.element_source);
    let l2 = error_l2(&space, &field, &*problem.exact_p);
    let energy = error_energy(&space, &field, problem);
    let (flux_l2, flux_hdiv) = error_flux(&space, &flux, &*problem.exact_u, &*problem.source);
    let row = ErrorRow {
        n,
        l2,
        energy,
        flux_l2,
        flux_hdiv,
        conservation: conservation.max,
        iterations: pcg.iterations,
        converged: pcg.converged,
        wall_time: start.elapsed().as_secs_f64(),
    };
    let result = CaseResult {
        row,
        n_dofs: system.n_dofs(),
        n_nodal: system.n_nodal,
        n_elements: system.n_elements,
        interface_elements: space.interface_elements().count(),
        pcg,
        setup_time,
        solve_time,
    };
    let artifacts = CaseArtifacts::write(&space, &system, &result.pcg, &field, &flux, cfg, n)?;
    Ok((result, artifacts))
}

/// Per-mesh output files.
#[derive(Clone, Debug, Default)]
pub struct CaseArtifacts {
    pub files: Vec<PathBuf>,
}

impl CaseArtifacts {
    fn write(
        space: &EnrichedSpace<'_>,
        system: &BlockSparseSystem,
        pcg: &PcgOutcome,
        field: &DiscreteField,
        flux: &RecoveredFlux,
        cfg: &RunConfig,
        n: usize,
    ) -> Result<Self> {
        let dir = &cfg.out_dir;
        let mut files = Vec::new();
        if cfg.wants(OutputFormat::Csv) {
            let mut text = String::from("iteration,relative_residual\n");
            for (k, r) in pcg.history.iter().enumerate() {
                let _ = writeln!(text, "{k},{r:.6e}");
            }
            files.push(write_text(dir, &format!("residuals_n{n}.csv"), &text)?);
        }
        if cfg.wants(OutputFormat::Vtk) {
            let path = dir.join(format!("solution_n{n}.vtk"));
            write_solution(space, field, BufWriter::new(File::create(&path)?))?;
            files.push(path);
            let path = dir.join(format!("flux_n{n}.vtk"));
            write_flux(space.mesh(), flux, BufWriter::new(File::create(&path)?))?;
            files.push(path);
        }
        if cfg.dump_system {
            let path = dir.join(format!("matrix_n{n}.mtx"));
            write_matrix_market(&system.matrix, BufWriter::new(File::create(&path)?))?;
            files.push(path);
            let path = dir.join(format!("rhs_n{n}.mtx"));
            write_vector(&system.rhs, BufWriter::new(File::create(&path)?))?;
            files.push(path);
            let path = dir.join(format!("solution_n{n}.mtx"));
            write_vector(&pcg.x, BufWriter::new(File::create(&path)?))?;
            files.push(path);
        }
        Ok(Self { files })
    }
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Dispatches on `cfg.command`.
pub fn run(cfg: &RunConfig, progress: &mut dyn Write) -> Result<RunSummary> {
    match cfg.command {
        Command::Solve => run_solve(cfg, progress),
        Command::Convergence => run_convergence(cfg, progress),
        Command::PrecondBench => run_precond_bench(cfg, progress),
    }
}

/// Single solves on each configured mesh, reported like a convergence table.
pub fn run_solve(cfg: &RunConfig, progress: &mut dyn Write) -> Result<RunSummary> {
    error_table_run(cfg, "solve", progress)
}

/// Convergence study over the mesh list.
pub fn run_convergence(cfg: &RunConfig, progress: &mut dyn Write) -> Result<RunSummary> {
    error_table_run(cfg, "convergence", progress)
}

fn error_table_run(cfg: &RunConfig, stem: &str, progress: &mut dyn Write) -> Result<RunSummary> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let problem = problem_for(cfg, cfg.beta_minus, cfg.beta_plus)?;
    let mut summary = RunSummary::default();
    let mut report = ErrorReport {
        title: format!("{} (beta-={}, beta+={}), theta={}, kappa={}", stem, cfg.beta_minus, cfg.beta_plus, cfg.theta.value(), cfg.kappa),
        rows: Vec::new(),
    };
    for &n in &cfg.mesh {
        let (case, artifacts) = run_case(&problem, n, cfg)?;
        let _ = writeln!(
            progress,
            "N={n}: {} dofs, {} PCG iterations{}, L2 {}, conservation {}",
            case.n_dofs,
            case.row.iterations,
            if case.row.converged { "" } else { " (not converged)" },
            format_error(case.row.l2),
            format_error(case.row.conservation)
        );
        if !case.row.converged {
            summary.unconverged.push(Unconverged {
                label: format!("N={n}"),
                iterations: case.pcg.iterations,
                residual: case.pcg.final_residual(),
                history: case.pcg.history.clone(),
            });
        }
        summary.files.extend(artifacts.files);
        report.rows.push(case.row);
    }
    if report.rows.len() > 1 && !report.is_halving() {
        summary
            .warnings
            .push(format!("{}; orders omitted", Error::NonHalvingSequence));
    }
    if cfg.wants(OutputFormat::Csv) {
        summary.files.push(write_text(&cfg.out_dir, &format!("{stem}.csv"), &report.to_csv())?);
    }
    summary.table = report.to_markdown();
    if cfg.wants(OutputFormat::Markdown) {
        summary.files.push(write_text(&cfg.out_dir, &format!("{stem}.md"), &summary.table)?);
    }
    Ok(summary)
}

/// One row of the preconditioner benchmark.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub n: usize,
    pub n_dofs: usize,
    pub ngs: usize,
    pub cycles: usize,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    /// Ritz estimate of the preconditioned condition number.
    pub condition: f64,
    /// Relative `|<Bx, y> - <x, By>|` for seeded random `x`, `y`.
    pub symmetry_defect: f64,
    pub setup_time: f64,
    pub solve_time: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub title: String,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn csv_header() -> &'static str {
        "beta_minus,beta_plus,N,inv_h,dofs,ngs,amg_cycles,pcg_iterations,converged,final_residual,condition_estimate,symmetry_defect,setup_time_s,solve_time_s"
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::csv_header());
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{:.4e},{:.3e},{:.3},{:.3}",
                r.beta_minus,
                r.beta_plus,
                r.n,
                r.n as f64 / 2.0,
                r.n_dofs,
                r.ngs,
                r.cycles,
                r.iterations,
                r.converged,
                format_error(r.final_residual),
                r.condition,
                r.symmetry_defect,
                r.setup_time,
                r.solve_time
            );
        }
        out
    }

    /// One table per coefficient case.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        if !self.title.is_empty() {
            let _ = writeln!(out, "### {}\n", self.title);
        }
        let mut cases: Vec<(f64, f64)> = Vec::new();
        for r in &self.rows {
            if !cases.contains(&(r.beta_minus, r.beta_plus)) {
                cases.push((r.beta_minus, r.beta_plus));
            }
        }
        for (m, p) in cases {
            let _ = writeln!(out, "#### (beta-, beta+) = ({m}, {p})\n");
            out.push_str("| N | 1/h | dofs | PCG its | cond. est. | setup (s) | solve (s) |\n");
            out.push_str("|---|---|---|---|---|---|---|\n");
            for r in self.rows.iter().filter(|r| r.beta_minus == m && r.beta_plus == p) {
                let its = if r.converged {
                    r.iterations.to_string()
                } else {
                    format!("{} (not converged)", r.iterations)
                };
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {:.2} | {:.3} | {:.3} |",
                    r.n,
                    r.n as f64 / 2.0,
                    r.n_dofs,
                    its,
                    r.condition,
                    r.setup_time,
                    r.solve_time
                );
            }
            out.push('\n');
        }
        out
    }
}

/// `|<Bx, y> - <x, By>| / (‖Bx‖ ‖y‖)` for random `x`, `y` drawn from `seed`.
pub fn symmetry_defect(pre: &dyn Preconditioner, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = pre.dim();
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let bx = pre.apply(&x)?;
    let by = pre.apply(&y)?;
    let scale = norm2(&bx) * norm2(&y);
    Ok(if scale == 0.0 { 0.0 } else { (dot(&bx, &y) - dot(&x, &by)).abs() / scale })
}

/// PCG iteration counts and timings for every coefficient case and mesh.
pub fn run_precond_bench(cfg: &RunConfig, progress: &mut dyn Write) -> Result<RunSummary> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut summary = RunSummary::default();
    let mut report = BenchReport {
        title: format!("PCG with the auxiliary-space preconditioner, N_GS={}, {} AMG cycles, rtol={:e}", cfg.ngs, cfg.cycles, cfg.rtol),
        rows: Vec::new(),
    };
    for case in &cfg.cases {
        let problem = problem_for(cfg, case.minus, case.plus)?;
        for &n in &cfg.mesh {
            let mesh = StructuredMesh::new(n, Rect::default())?;
            let space = EnrichedSpace::new(&mesh, problem.level_set.clone(), problem.beta)?;
            let t0 = Instant::now();
            let system = assemble(&space, &problem, &cfg.assembly_params())?;
            let pre = AuxPreconditioner::new(&system, &cfg.aux_params())?;
            let setup_time = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let out = pcg_detailed(&system.matrix, &system.rhs, Some(&pre), &cfg.pcg_params())?;
            let solve_time = t1.elapsed().as_secs_f64();
            let condition = out.ritz_extremes().map_or(f64::NAN, |(lo, hi)| hi / lo);
            let symmetry = symmetry_defect(&pre, cfg.seed)?;
            let _ = writeln!(
                progress,
                "case {} N={n}: {} PCG iterations{}",
                case.label(),
                out.iterations,
                if out.converged { "" } else { " (not converged)" }
            );
            if !out.converged {
                summary.unconverged.push(Unconverged {
                    label: format!("case {} N={n}", case.label()),
                    iterations: out.iterations,
                    residual: out.final_residual(),
                    history: out.history.clone(),
                });
            }
            if cfg.dump_system {
                let path = cfg.out_dir.join(format!("matrix_{}_{}_n{n}.mtx", case.minus, case.plus));
                write_matrix_market(&system.matrix, BufWriter::new(File::create(&path)?))?;
                summary.files.push(path);
            }
            report.rows.push(BenchRow {
                beta_minus: case.minus,
                beta_plus: case.plus,
                n,
                n_dofs: system.n_dofs(),
                ngs: cfg.ngs,
                cycles: cfg.cycles,
                iterations: out.iterations,
                converged: out.converged,
                final_residual: out.final_residual(),
                condition,
                symmetry_defect: symmetry,
                setup_time,
                solve_time,
            });
        }
    }
    if cfg.wants(OutputFormat::Csv) {
        summary.files.push(write_text(&cfg.out_dir, "precond_bench.csv", &report.to_csv())?);
    }
    summary.table = report.to_markdown();
    if cfg.wants(OutputFormat::Markdown) {
        summary.files.push(write_text(&cfg.out_dir, "precond_bench.md", &summary.table)?);
    }
    if cfg.wants(OutputFormat::Vtk) {
        summary.warnings.push("precond-bench writes no VTK output".into());
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::DensePreconditioner;
    use crate::linalg::SparseMatrix;

    #[test]
    fn symmetric_operator_has_tiny_defect() {
        let a = SparseMatrix::from_dense(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 2.0]]);
        let pre = DensePreconditioner::new(&a).unwrap();
        assert!(symmetry_defect(&pre, 7).unwrap() < 1e-14);
    }

    #[test]
    fn bench_csv_has_one_line_per_row() {
        let row = BenchRow {
            beta_minus: 1.0,
            beta_plus: 10.0,
            n: 32,
            n_dofs: 3009,
            ngs: 1,
            cycles: 5,
            iterations: 12,
            converged: true,
            final_residual: 5e-8,
            condition: 4.0,
            symmetry_defect: 1e-16,
            setup_time: 0.1,
            solve_time: 0.2,
        };
        let r = BenchReport { title: String::new(), rows: vec![row.clone(), BenchRow { n: 64, ..row }] };
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("1,10,32,16,3009,1,5,12,true,"));
        assert!(r.to_markdown().contains("(beta-, beta+) = (1, 10)"));
    }
}
