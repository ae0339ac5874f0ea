//! Front-end for the `bihamo` binary: argument parsing, file loading and reports.

pub mod error;
pub mod expr;
pub mod pencil_file;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use bihamo::cohomology::{slice_cohomology, SliceSpec, Space};
use bihamo::functionals::central_invariants;
use bihamo::jet::{slice_basis, Element};
use bihamo::operators::{Operator, OperatorId, Square};
use bihamo::pencil::{DeformationCoeffs, Mode, Pencil, PencilData};
use bihamo::{Coeff, CoeffFn, FormalScalar};

pub use error::CliError;
pub use expr::{parse_expr, Expr};
pub use pencil_file::{parse_pencil_file, PencilFile};
use report::{Report, Status, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "bihamo", version, about = "Exact computations for semisimple Poisson pencils of hydrodynamic type")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "tsv", global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the equations on the rotation coefficients.
    Validate { file: PathBuf },
    /// Check that D_lambda squares to zero on a slice basis.
    Nilpotency {
        file: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        d: usize,
        /// Work in the ring of formal rotation coefficients.
        #[arg(long)]
        formal: bool,
    },
    /// Cohomology dimensions on truncated windows.
    Cohomology {
        file: PathBuf,
        /// A, F, C or dC<i>.
        #[arg(long)]
        space: String,
        #[arg(long)]
        p: i64,
        #[arg(long)]
        d: i64,
        #[arg(long = "K")]
        k: usize,
        #[arg(long = "L")]
        l: usize,
        /// Differential name, e.g. D_lambda, Delta_minus1, Di(1).
        #[arg(long)]
        diff: Option<String>,
    },
    /// Central invariants of the deformation in a pencil file.
    CentralInvariants { file: PathBuf },
    /// List the monomials of a slice.
    Basis {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        d: usize,
        #[arg(long = "N")]
        n: usize,
    },
    /// Central invariant of the KdV deformation.
    KdvDemo,
}

/// Exit code and captured output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    match execute(&cli.command) {
        Ok(r) => Outcome {
            code: if r.status == Status::Pass { 0 } else { 1 },
            stdout: match cli.format {
                Format::Tsv => r.to_tsv(),
                Format::Structured => r.to_structured(),
            },
            stderr: String::new(),
        },
        Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn load(path: &Path) -> Result<PencilFile, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    parse_pencil_file(&src)
}

pub fn execute(cmd: &Command) -> Result<Report, CliError> {
    match cmd {
        Command::Validate { file } => validate(&load(file)?.data),
        Command::Nilpotency { file, p, d, formal } => nilpotency(&load(file)?.data, *p, *d, *formal),
        Command::Cohomology { file, space, p, d, k, l, diff } => cohomology(&load(file)?.data, space, *p, *d, *k, *l, diff.as_deref()),
        Command::CentralInvariants { file } => {
            let f = load(file)?;
            invariants("central-invariants", &f.data, &f.deformation)
        }
        Command::Basis { p, d, n } => basis(*p, *d, *n),
        Command::KdvDemo => {
            let mut a = DeformationCoeffs::new(1);
            a.set(2, 3, 2, 0, 0, CoeffFn::from_rat(bihamo::rat::rat(1, 8)))?;
            invariants("kdv-demo", &PencilData::flat(1), &a)
        }
    }
}

fn indices(ix: &[usize]) -> String {
    ix.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

pub fn validate(data: &PencilData) -> Result<Report, CliError> {
    let mut r = Report::new("validate");
    let mut t = Table::new("residuals", &["family", "indices", "residual"]);
    let (total, bad) = match data.mode {
        Mode::Concrete => {
            let rep = Pencil::concrete(data)?.validate_ferapontov()?;
            for x in &rep.residuals {
                t.push([x.family.to_string(), indices(&x.indices), x.value.to_string()]);
            }
            (rep.residuals.len(), rep.failures().count())
        }
        Mode::Formal => {
            let rep = Pencil::<FormalScalar>::formal(data.n)?.validate_ferapontov()?;
            for x in &rep.residuals {
                t.push([x.family.to_string(), indices(&x.indices), x.value.to_string()]);
            }
            (rep.residuals.len(), rep.failures().count())
        }
    };
    r.field("residuals", total);
    r.field("nonzero", bad);
    if bad > 0 {
        r.fail();
    }
    r.tables.push(t);
    Ok(r)
}

fn square_rows<C: Coeff>(n: usize, p: usize, d: usize, sq: impl Fn(&Element<C>) -> bihamo::Result<Element<C>>) -> Result<(Table, usize), CliError> {
    let mut t = Table::new("residuals", &["monomial", "residual_terms"]);
    let mut bad = 0;
    for m in slice_basis(p, d, n) {
        let x = sq(&Element::monomial(n, m.clone(), C::one()))?;
        bad += usize::from(!x.is_zero());
        t.push([m.to_string(), x.len().to_string()]);
    }
    Ok((t, bad))
}

pub fn nilpotency(data: &PencilData, p: usize, d: usize, formal: bool) -> Result<Report, CliError> {
    let mut r = Report::new("nilpotency");
    let n = data.n;
    let (t, bad) = if formal || data.mode == Mode::Formal {
        let pencil = Pencil::<FormalScalar>::formal(n)?;
        let op = Operator::new(&pencil, OperatorId::DLambda)?;
        let sq = Square::new(&op)?;
        r.field("ring", "formal");
        square_rows(n, p, d, |a| sq.apply(a))?
    } else {
        let pencil = Pencil::concrete(data)?;
        let op = Operator::new(&pencil, OperatorId::DLambda)?;
        r.field("ring", "concrete");
        square_rows(n, p, d, |a| op.apply(&op.apply(a)?))?
    };
    r.field("basis", t.rows.len());
    r.field("nonzero", bad);
    if bad > 0 {
        r.fail();
    }
    r.tables.push(t);
    Ok(r)
}

fn parse_space(s: &str, n: usize) -> Result<Space, CliError> {
    Ok(match s {
        "A" => Space::AFull,
        "F" => Space::FHat,
        "C" => Space::CHat,
        _ => {
            let i: usize = s
                .strip_prefix("dC")
                .and_then(|x| x.parse().ok())
                .filter(|&i| (1..=n).contains(&i))
                .ok_or_else(|| CliError::Usage(format!("unknown space '{s}' (expected A, F, C or dC1..dC{n})")))?;
            Space::DCi(i - 1)
        }
    })
}

pub fn cohomology(data: &PencilData, space: &str, p: i64, d: i64, k: usize, l: usize, diff: Option<&str>) -> Result<Report, CliError> {
    let space = parse_space(space, data.n)?;
    let diff = match diff {
        Some(name) => name.parse::<OperatorId>()?,
        None => match space {
            Space::AFull | Space::FHat => OperatorId::DLambda,
            Space::CHat => OperatorId::DeltaMinus1,
            Space::DCi(i) => OperatorId::Di(i),
        },
    };
    let rep = slice_cohomology(&SliceSpec::new(p, d, k, l, space, diff).weighted(), data)?;
    let mut r = Report::new("cohomology");
    r.field("space", space);
    r.field("differential", diff);
    r.field("p", p);
    r.field("d", d);
    let mut w = Table::new("windows", &["K", "L", "dim_space", "dim_ker", "dim_im", "dim_H"]);
    for x in &rep.rows {
        w.push([x.k, x.l, x.dim_space, x.dim_ker, x.dim_im, x.dim_h]);
    }
    let mut s = Table::new("stable", &["scan", "fixed", "from", "dim_H"]);
    for (scan, list) in [("L", &rep.stable_in_l), ("K", &rep.stable_in_k)] {
        for x in list {
            let h = x.dim_h.map_or("boundary".to_string(), |h| h.to_string());
            s.push([scan.to_string(), x.fixed.to_string(), x.from.to_string(), h]);
        }
    }
    r.tables.push(w);
    r.tables.push(s);
    Ok(r)
}

pub fn invariants(command: &str, data: &PencilData, a: &DeformationCoeffs) -> Result<Report, CliError> {
    if data.mode != Mode::Concrete {
        return Err(CliError::Usage("central invariants need a concrete pencil".into()));
    }
    let c = central_invariants(&Pencil::concrete(data)?, a)?;
    let mut r = Report::new(command);
    for (i, ci) in c.c.iter().enumerate() {
        r.field(&format!("c{}", i + 1), ci);
    }
    if !c.is_consistent() {
        r.fail();
        let mut t = Table::new("violations", &["i", "c_i"]);
        for i in c.violations() {
            t.push([(i + 1).to_string(), c.c[i].to_string()]);
        }
        r.tables.push(t);
    }
    Ok(r)
}

pub fn basis(p: usize, d: usize, n: usize) -> Result<Report, CliError> {
    if n == 0 {
        return Err(CliError::Usage("N must be at least 1".into()));
    }
    let mut r = Report::new("basis");
    let mut t = Table::new("basis", &["monomial"]);
    for m in slice_basis(p, d, n) {
        t.push([m.to_string()]);
    }
    r.tables.push(t);
    Ok(r)
}
