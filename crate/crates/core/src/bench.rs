//! Experiment presets and CSV convergence histories.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dense::DenseVector;
use crate::error::{Error, Result};
use crate::kernels::dense_lu_solve;
use crate::mm::{read_matrix_market_file, read_matrix_market_rhs_file};
use crate::solvers::{solve, SolveReport, SolverConfig, Variant};
use crate::sparse::{gen_bidiagonal, gen_laplacian_1d, CsrMatrix};

/// Largest order for which a dense LU reference solution is computed.
pub const DENSE_REFERENCE_LIMIT: usize = 5000;

pub const CSV_HEADER: [&str; 10] = [
    "experiment",
    "variant",
    "m",
    "k",
    "cycle",
    "paper_mvp",
    "true_mvp",
    "relres",
    "errnorm",
    "status",
];

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    Laplacian1d(usize),
    Bidiagonal(usize, f64),
    Identity(usize),
    File(PathBuf),
}

impl MatrixSource {
    pub fn load(&self) -> Result<CsrMatrix> {
        match self {
            MatrixSource::Laplacian1d(n) => gen_laplacian_1d(*n),
            MatrixSource::Bidiagonal(n, s) => gen_bidiagonal(*n, *s),
            MatrixSource::Identity(n) if *n > 0 => Ok(CsrMatrix::identity(*n)),
            MatrixSource::Identity(_) => {
                Err(Error::InvalidArgument("order must be at least 1".into()))
            }
            MatrixSource::File(p) => read_matrix_market_file(p),
        }
    }
}

impl FromStr for MatrixSource {
    type Err = Error;

    /// `gen:laplacian1d:N`, `gen:bidiag:N:S`, `gen:identity:N`, or a path.
    fn from_str(s: &str) -> Result<Self> {
        let Some(spec) = s.strip_prefix("gen:") else {
            return Ok(MatrixSource::File(PathBuf::from(s)));
        };
        let bad = || Error::InvalidArgument(format!("bad generator spec '{s}'"));
        let parts: Vec<&str> = spec.split(':').collect();
        let order = |t: &str| t.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["laplacian1d", n] => Ok(MatrixSource::Laplacian1d(order(n)?)),
            ["identity", n] => Ok(MatrixSource::Identity(order(n)?)),
            ["bidiag", n, sd] => Ok(MatrixSource::Bidiagonal(
                order(n)?,
                sd.parse().map_err(|_| bad())?,
            )),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for MatrixSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixSource::Laplacian1d(n) => write!(f, "gen:laplacian1d:{n}"),
            MatrixSource::Bidiagonal(n, s) => write!(f, "gen:bidiag:{n}:{s}"),
            MatrixSource::Identity(n) => write!(f, "gen:identity:{n}"),
            MatrixSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RhsSpec {
    Ones,
    /// `(1, 0, ..., 0, 1)^T`
    E1En,
    File(PathBuf),
    Custom(DenseVector),
}

impl RhsSpec {
    pub fn build(&self, n: usize) -> Result<DenseVector> {
        let b = match self {
            RhsSpec::Ones => vec![1.0; n],
            RhsSpec::E1En => {
                let mut b = vec![0.0; n];
                if n > 0 {
                    b[0] = 1.0;
                    b[n - 1] = 1.0;
                }
                b
            }
            RhsSpec::File(p) => read_matrix_market_rhs_file(p)?,
            RhsSpec::Custom(v) => v.clone(),
        };
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                context: "right-hand side",
                expected: n,
                found: b.len(),
            });
        }
        Ok(b)
    }
}

impl FromStr for RhsSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ones" => RhsSpec::Ones,
            "e1en" => RhsSpec::E1En,
            path => RhsSpec::File(PathBuf::from(path)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariantSpec {
    pub variant: Variant,
    pub m: usize,
    pub k: usize,
}

impl VariantSpec {
    pub fn plain(m: usize) -> Self {
        Self {
            variant: Variant::Plain,
            m,
            k: 0,
        }
    }

    pub fn sv(m: usize, k: usize) -> Self {
        Self {
            variant: Variant::Sv,
            m,
            k,
        }
    }

    pub fn hr(m: usize, k: usize) -> Self {
        Self {
            variant: Variant::Hr,
            m,
            k,
        }
    }

    /// `sv(20,4)` or `plain(22)` style label for summaries.
    pub fn label(&self) -> String {
        match self.variant {
            Variant::Plain => format!("plain({})", self.m),
            v => format!("{}({},{})", v.as_str(), self.m, self.k),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentPreset {
    pub name: String,
    pub matrix: MatrixSource,
    pub rhs: RhsSpec,
    pub variants: Vec<VariantSpec>,
    pub tol: f64,
    pub max_cycles: usize,
    pub max_true_matvecs: usize,
}

impl ExperimentPreset {
    pub fn new(
        name: impl Into<String>,
        matrix: MatrixSource,
        rhs: RhsSpec,
        variants: Vec<VariantSpec>,
    ) -> Self {
        Self {
            name: name.into(),
            matrix,
            rhs,
            variants,
            tol: 1e-8,
            max_cycles: 300,
            max_true_matvecs: usize::MAX,
        }
    }

    /// Built-in presets: `identity`, `example1`, `example4`.
    pub fn builtin(name: &str) -> Option<Self> {
        Some(match name {
            "identity" => Self::new(
                name,
                MatrixSource::Identity(10),
                RhsSpec::Ones,
                vec![VariantSpec::plain(5)],
            ),
            "example1" => {
                let mut p = Self::new(
                    name,
                    MatrixSource::Laplacian1d(1000),
                    RhsSpec::E1En,
                    vec![
                        VariantSpec::sv(20, 4),
                        VariantSpec::hr(20, 4),
                        VariantSpec::plain(20),
                        VariantSpec::plain(24),
                    ],
                );
                // enough cycles for every variant to pass 5000 Krylov-step products
                p.max_cycles = 400;
                p
            }
            "example4" => Self::new(
                name,
                MatrixSource::Bidiagonal(1000, 0.1),
                RhsSpec::Ones,
                vec![
                    VariantSpec::sv(20, 2),
                    VariantSpec::hr(20, 2),
                    VariantSpec::plain(22),
                    VariantSpec::plain(20),
                ],
            ),
            _ => return None,
        })
    }

    /// Presets over Matrix Market files supplied by the user: `example2`
    /// (SHERMAN4-style, GMRES(23,3) family), `example3` (WATT1-style,
    /// GMRES(30,5) family), and `table1` (SV(30,4) against plain(30)).
    pub fn with_matrix_file(name: &str, matrix: PathBuf, rhs: RhsSpec) -> Option<Self> {
        let variants = match name {
            "example2" => vec![
                VariantSpec::sv(23, 3),
                VariantSpec::hr(23, 3),
                VariantSpec::plain(23),
                VariantSpec::plain(26),
            ],
            "example3" => vec![
                VariantSpec::sv(30, 5),
                VariantSpec::hr(30, 5),
                VariantSpec::plain(30),
                VariantSpec::plain(35),
            ],
            "table1" => vec![
                VariantSpec::sv(30, 4),
                VariantSpec::hr(30, 4),
                VariantSpec::plain(30),
            ],
            _ => return None,
        };
        Some(Self::new(name, MatrixSource::File(matrix), rhs, variants))
    }

    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "preset '{}' has no variants",
                self.name
            )));
        }
        for v in &self.variants {
            self.config(v).validate()?;
        }
        Ok(())
    }

    pub fn config(&self, spec: &VariantSpec) -> SolverConfig {
        SolverConfig::new(spec.variant, spec.m, spec.k)
            .with_tol(self.tol)
            .with_max_cycles(self.max_cycles)
            .with_max_true_matvecs(self.max_true_matvecs)
    }
}

#[derive(Debug, Clone)]
pub struct VariantRun {
    pub spec: VariantSpec,
    pub report: SolveReport,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub name: String,
    pub n: usize,
    pub runs: Vec<VariantRun>,
}

/// Solves `A x = b` with dense LU when `n` is within [`DENSE_REFERENCE_LIMIT`].
pub fn reference_solution(a: &CsrMatrix, b: &[f64]) -> Option<DenseVector> {
    if a.n_rows() > DENSE_REFERENCE_LIMIT {
        return None;
    }
    dense_lu_solve(&a.to_dense(), b).ok()
}

/// Runs every variant of `preset` from a zero initial guess. Variants run in
/// parallel; results come back in preset order.
pub fn run_experiment(preset: &ExperimentPreset) -> Result<ExperimentOutcome> {
    preset.validate()?;
    let a = preset.matrix.load()?;
    let n = a.n_rows();
    let b = preset.rhs.build(n)?;
    let x_ref = reference_solution(&a, &b);
    let x0 = vec![0.0; n];
    let runs = preset
        .variants
        .par_iter()
        .map(|spec| {
            let report = solve(&a, &b, &x0, &preset.config(spec), x_ref.as_deref())?;
            Ok(VariantRun {
                spec: *spec,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutcome {
        name: preset.name.clone(),
        n,
        runs,
    })
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

impl ExperimentOutcome {
    /// One row per (variant, cycle). The last row of each variant carries
    /// `converged` or `not_converged` in the status column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for run in &self.runs {
            let entries = &run.report.record.entries;
            for (i, e) in entries.iter().enumerate() {
                let status = match (i + 1 == entries.len(), run.report.converged) {
                    (false, _) => "",
                    (true, true) => "converged",
                    (true, false) => "not_converged",
                };
                w.write_record([
                    self.name.clone(),
                    run.spec.variant.as_str().to_string(),
                    run.spec.m.to_string(),
                    run.spec.k.to_string(),
                    e.cycle.to_string(),
                    e.paper_mvp.to_string(),
                    e.true_mvp.to_string(),
                    sci(e.relres),
                    e.error_norm.map(sci).unwrap_or_default(),
                    status.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|source| Error::Io {
            path: "<csv output>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn all_converged(&self) -> bool {
        self.runs.iter().all(|r| r.report.converged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_preset_converges_in_one_cycle() {
        let out = run_experiment(&ExperimentPreset::builtin("identity").unwrap()).unwrap();
        let rec = &out.runs[0].report.record;
        assert_eq!(rec.len(), 1);
        assert_eq!(rec.entries[0].relres, 0.0);
        let csv = out.to_csv_string().unwrap();
        assert!(csv.starts_with(
            "experiment,variant,m,k,cycle,paper_mvp,true_mvp,relres,errnorm,status\n"
        ));
        assert!(csv.lines().nth(1).unwrap().ends_with(",converged"));
    }

    #[test]
    fn parses_sources() {
        assert_eq!(
            "gen:laplacian1d:7".parse::<MatrixSource>().unwrap(),
            MatrixSource::Laplacian1d(7)
        );
        assert_eq!(
            "gen:bidiag:9:0.1".parse::<MatrixSource>().unwrap(),
            MatrixSource::Bidiagonal(9, 0.1)
        );
        assert!("gen:bidiag:9".parse::<MatrixSource>().is_err());
        assert_eq!(
            "a.mtx".parse::<MatrixSource>().unwrap(),
            MatrixSource::File("a.mtx".into())
        );
        assert_eq!(RhsSpec::E1En.build(3).unwrap(), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn missing_file_names_the_path() {
        let p = ExperimentPreset::with_matrix_file(
            "table1",
            "/nonexistent/sherman1.mtx".into(),
            RhsSpec::Ones,
        )
        .unwrap();
        let err = run_experiment(&p).unwrap_err().to_string();
        assert!(err.contains("/nonexistent/sherman1.mtx"), "{err}");
    }

    #[test]
    fn invalid_variant_rejected() {
        let mut p = ExperimentPreset::builtin("identity").unwrap();
        p.variants = vec![VariantSpec::sv(4, 4)];
        assert!(run_experiment(&p).is_err());
    }
}
