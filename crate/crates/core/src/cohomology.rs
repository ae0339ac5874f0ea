//! Truncated-slice cohomology.
//!
//! A window at bidegree `(p, d)` is spanned by `mu * lambda^b * m` with `m` a
//! slice monomial, `mu` a u-monomial and `b <= L`. Two truncations exist:
//! [`Truncation::Coefficient`] bounds `deg mu <= K` and is what [`assemble`]
//! uses by default; [`Truncation::Weighted`] bounds `deg mu + u_count(m) + b <= K`.
//! With constant `f` the pencil differentials are homogeneous for that weight,
//! so weighted windows are subcomplexes and carry the cohomology computations.
//! Powers of lambda above `L` are quotiented out (the multiples of
//! `lambda^{L+1}` form a subcomplex).

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::One;

use crate::coeff::{poly_coordinates, Coeff, CoeffFn};
use crate::error::{Error, Result};
use crate::functionals::Functional;
use crate::jet::{slice_basis, subspace_classify, Element, JetMonomial, SubspaceClass};
use crate::linalg::{Echelon, IntVec, SparseMatrix};
use crate::operators::{Operator, OperatorId};
use crate::pencil::{Pencil, PencilData};
use crate::poly::{Mono, Poly, Var};
use crate::rat::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    AFull,
    CHat,
    /// `dhat_i` of the nontrivial single-index monomials, modulo `lambda - u^i`.
    DCi(usize),
    FHat,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::AFull => f.write_str("A"),
            Space::CHat => f.write_str("C"),
            Space::DCi(i) => write!(f, "dC{}", i + 1),
            Space::FHat => f.write_str("F"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Truncation {
    /// `deg mu <= K`.
    #[default]
    Coefficient,
    /// `deg mu + u_count(m) + b <= K`: lambda weighs as much as a u.
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SliceSpec {
    pub p: i64,
    pub d: i64,
    pub k: usize,
    pub l: usize,
    pub space: Space,
    pub differential: OperatorId,
    pub truncation: Truncation,
}

impl SliceSpec {
    pub fn new(p: i64, d: i64, k: usize, l: usize, space: Space, differential: OperatorId) -> Self {
        SliceSpec { p, d, k, l, space, differential, truncation: Truncation::Coefficient }
    }

    pub fn weighted(self) -> Self {
        SliceSpec { truncation: Truncation::Weighted, ..self }
    }

    pub fn with_window(self, k: usize, l: usize) -> Self {
        SliceSpec { k, l, ..self }
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.differential.bidegree_shift() != (1, 1) {
            return Err(Error::Range(format!("{} does not raise the bidegree", self.differential)));
        }
        for i in self.differential.indices() {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i + 1, n });
            }
        }
        match self.space {
            Space::DCi(i) if i >= n => Err(Error::IndexOutOfRange { index: i + 1, n }),
            Space::DCi(i) if self.differential.indices() != vec![i] => {
                Err(Error::Range(format!("space dC{} needs a differential indexed by {}", i + 1, i + 1)))
            }
            Space::FHat if !matches!(self.differential, OperatorId::DLambda | OperatorId::DFirst | OperatorId::DSecond) => {
                Err(Error::Range(format!("{} does not commute with d_x", self.differential)))
            }
            _ => Ok(()),
        }
    }
}

/// Row or column label: jet monomial, u-monomial, lambda power.
pub type BasisKey = (JetMonomial, Mono, i32);

/// Exact matrix of a differential between two windows.
#[derive(Clone, Debug)]
pub struct SliceMatrix {
    pub domain: SliceSpec,
    /// `(K', L')` of the codomain window.
    pub codomain_window: (usize, usize),
    pub domain_basis: Vec<BasisKey>,
    pub codomain_basis: Vec<BasisKey>,
    pub matrix: SparseMatrix,
}

impl SliceMatrix {
    pub fn nrows(&self) -> usize {
        self.codomain_basis.len()
    }

    pub fn ncols(&self) -> usize {
        self.domain_basis.len()
    }
}

pub fn exact_rank(m: &SliceMatrix) -> usize {
    m.matrix.rank()
}

/// u-monomials in `n` variables of total degree at most `deg`.
fn u_monomials(n: usize, deg: usize) -> Vec<Mono> {
    let mut out = vec![Mono::one()];
    let mut layer = vec![Mono::one()];
    for _ in 0..deg {
        let mut next = Vec::new();
        for m in &layer {
            // extend only at or beyond the last variable to avoid repeats
            let last = m.0.last().map_or(0, |&(v, _)| v as usize);
            for v in last..n {
                next.push(m.mul(&Mono::var(v as Var, 1)));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn slice(p: i64, d: i64, n: usize) -> Vec<JetMonomial> {
    if p < 0 || d < 0 {
        return Vec::new();
    }
    slice_basis(p as usize, d as usize, n)
}

fn budget(t: Truncation, k: usize, m: &JetMonomial) -> Option<usize> {
    match t {
        Truncation::Coefficient => Some(k),
        Truncation::Weighted => k.checked_sub(m.u_count()),
    }
}

fn element_of(n: usize, m: &JetMonomial, mu: &Mono) -> Element<CoeffFn> {
    Element::monomial(n, m.clone(), CoeffFn::from_poly(Poly::monomial(mu.clone(), Rat::one())))
}

type Coords = Vec<(BasisKey, Rat)>;

fn coordinates(a: &Element<CoeffFn>) -> Result<Coords> {
    let mut out = Vec::new();
    for (m, c) in a.terms() {
        for (mu, b, x) in poly_coordinates(c)? {
            out.push(((m.clone(), mu, b), x));
        }
    }
    Ok(out)
}

fn weight_of(t: Truncation, key: &BasisKey) -> usize {
    let deg = key.1.total_degree() as usize;
    match t {
        Truncation::Coefficient => deg,
        Truncation::Weighted => deg + key.0.u_count() + key.2 as usize,
    }
}

/// A spanning vector of a window: its own coordinates and those of its image.
struct Generator {
    coords: Coords,
    image: Coords,
}

/// Shared state for one pencil and one differential.
struct Engine {
    n: usize,
    fdeg: usize,
    space: Space,
    truncation: Truncation,
    diff: Operator<CoeffFn>,
    images: RefCell<HashMap<(JetMonomial, Mono), Coords>>,
    index: RefCell<HashMap<BasisKey, usize>>,
}

fn shift(c: &Coords, b: i32) -> Coords {
    c.iter().map(|((m, mu, e), x)| ((m.clone(), mu.clone(), e + b), x.clone())).collect()
}

impl Engine {
    fn new(spec: &SliceSpec, data: &PencilData) -> Result<Self> {
        spec.check(data.n)?;
        let fdeg = data.max_f_degree()? as usize;
        let pencil = Pencil::concrete(data)?;
        let diff = Operator::new(&pencil, spec.differential)?;
        Ok(Engine {
            n: data.n,
            fdeg,
            space: spec.space,
            truncation: spec.truncation,
            diff,
            images: RefCell::new(HashMap::new()),
            index: RefCell::new(HashMap::new()),
        })
    }

    /// Largest lambda power that fits next to `mu` within budget `e`.
    fn lambda_room(&self, e: usize, mu: &Mono) -> usize {
        match self.truncation {
            Truncation::Coefficient => usize::MAX,
            Truncation::Weighted => e - mu.total_degree() as usize,
        }
    }

    fn idx(&self, key: &BasisKey) -> usize {
        let mut ix = self.index.borrow_mut();
        let next = ix.len();
        *ix.entry(key.clone()).or_insert(next)
    }

    /// Integer vector of `c`, dropping lambda powers above `l`.
    fn vector(&self, c: &Coords, l: usize) -> IntVec {
        let kept: Vec<(usize, &Rat)> = c.iter().filter(|(k, _)| k.2 as usize <= l).map(|(k, x)| (self.idx(k), x)).collect();
        // repeated keys are summed before clearing denominators
        let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
        for (i, x) in kept {
            *acc.entry(i).or_insert_with(|| Rat::from_integer(0.into())) += x;
        }
        IntVec::from_rats(acc.iter().map(|(&i, x)| (i, x)))
    }

    fn apply_diff(&self, a: &Element<CoeffFn>) -> Result<Element<CoeffFn>> {
        let out = self.diff.apply(a)?;
        Ok(match self.space {
            Space::DCi(i) => out.map_coeffs(|c| c.set_lambda(i)),
            _ => out,
        })
    }

    fn image(&self, m: &JetMonomial, mu: &Mono) -> Result<Coords> {
        let key = (m.clone(), mu.clone());
        if let Some(c) = self.images.borrow().get(&key) {
            return Ok(c.clone());
        }
        let c = coordinates(&self.apply_diff(&self.pre(m, mu)?)?)?;
        self.images.borrow_mut().insert(key, c.clone());
        Ok(c)
    }

    /// The element a generator label stands for.
    fn pre(&self, m: &JetMonomial, mu: &Mono) -> Result<Element<CoeffFn>> {
        let e = element_of(self.n, m, mu);
        match self.space {
            Space::DCi(i) => Operator::new(self.diff.pencil(), OperatorId::Dhat(i))?.apply(&e),
            _ => Ok(e),
        }
    }

    fn member(&self, m: &JetMonomial) -> bool {
        match self.space {
            Space::AFull | Space::FHat => true,
            Space::CHat => subspace_classify(m) == SubspaceClass::CHat,
            Space::DCi(i) => subspace_classify(m) == SubspaceClass::CiNt(i),
        }
    }

    /// Spanning set of the window at `(p, d)`.
    fn generators(&self, p: i64, d: i64, k: usize, l: usize, with_images: bool) -> Result<Vec<Generator>> {
        let (p0, d0, lmax) = match self.space {
            Space::DCi(_) => (p - 1, d - 1, 0),
            _ => (p, d, l),
        };
        let mut out = Vec::new();
        for m in slice(p0, d0, self.n) {
            if !self.member(&m) {
                continue;
            }
            let Some(e) = budget(self.truncation, k, &m) else { continue };
            for mu in u_monomials(self.n, e) {
                let bmax = lmax.min(self.lambda_room(e, &mu));
                let (coords, image) = match self.space {
                    Space::DCi(_) => {
                        let c = coordinates(&self.pre(&m, &mu)?)?;
                        (c, if with_images { self.image(&m, &mu)? } else { Vec::new() })
                    }
                    _ => (vec![((m.clone(), mu.clone(), 0), Rat::one())], if with_images { self.image(&m, &mu)? } else { Vec::new() }),
                };
                for b in 0..=bmax as i32 {
                    out.push(Generator { coords: shift(&coords, b), image: shift(&image, b) });
                }
            }
        }
        Ok(out)
    }

    /// `d_x` of the window at `(p, d - 1)`, plus constants at `(0, 0)`.
    fn boundaries(&self, p: i64, d: i64, k: usize, l: usize) -> Result<Vec<Coords>> {
        if self.space != Space::FHat {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for m in slice(p, d - 1, self.n) {
            let Some(e) = budget(self.truncation, k, &m) else { continue };
            for mu in u_monomials(self.n, e) {
                let c = coordinates(&element_of(self.n, &m, &mu).dx())?;
                for b in 0..=l.min(self.lambda_room(e, &mu)) as i32 {
                    out.push(shift(&c, b));
                }
            }
        }
        if p == 0 && d == 0 {
            for b in 0..=l.min(self.lambda_room(k, &Mono::one())) as i32 {
                out.push(vec![((JetMonomial::one(), Mono::one(), b), Rat::one())]);
            }
        }
        Ok(out)
    }

    /// `rank(span(vs) + B) - rank(B)`.
    fn relative_rank<'a>(&self, base: &[Coords], vs: impl Iterator<Item = &'a Coords>, l: usize) -> usize {
        let mut e = Echelon::new();
        for b in base {
            e.insert(self.vector(b, l));
        }
        let r0 = e.rank();
        for v in vs {
            e.insert(self.vector(v, l));
        }
        e.rank() - r0
    }

    fn check_images(&self, gens: &[Generator], k: usize) -> Result<()> {
        let cap = k + self.fdeg + usize::from(self.truncation == Truncation::Coefficient);
        if matches!(self.space, Space::DCi(_)) {
            return Ok(());
        }
        for g in gens {
            if let Some((key, _)) = g.image.iter().find(|(key, _)| weight_of(self.truncation, key) > cap) {
                return Err(Error::TruncationOverflow(format!("{} u^{:?} lambda^{} exceeds K = {cap}", key.0, key.1 .0, key.2)));
            }
        }
        Ok(())
    }

    fn row(&self, p: i64, d: i64, k: usize, l: usize) -> Result<WindowRow> {
        let at = self.generators(p, d, k, l, true)?;
        self.check_images(&at, k)?;
        let b_at = self.boundaries(p, d, k, l)?;
        let b_next = self.boundaries(p + 1, d + 1, k + self.fdeg, l)?;
        let dim_space = self.relative_rank(&b_at, at.iter().map(|g| &g.coords), l);
        let rank_out = self.relative_rank(&b_next, at.iter().map(|g| &g.image), l);
        let dim_im = match k.checked_sub(self.fdeg) {
            Some(kin) => {
                let inc = self.generators(p - 1, d - 1, kin, l, true)?;
                self.relative_rank(&b_at, inc.iter().map(|g| &g.image), l)
            }
            None => 0,
        };
        let dim_ker = dim_space - rank_out;
        if dim_im > dim_ker {
            return Err(Error::Range(format!("image larger than kernel at ({p},{d}) K={k} L={l}")));
        }
        Ok(WindowRow { k, l, dim_space, dim_ker, dim_im, dim_h: dim_ker - dim_im })
    }
}

/// The full-window matrix of `spec.differential`, codomain `(K + deg f + 1, L + 1)`
/// for coefficient truncation and `(K + deg f, L + 1)` for weighted truncation.
/// For `F_hat` the matrix is the one on representatives; the quotient is taken in
/// [`cohomology_dim`].
pub fn assemble(spec: &SliceSpec, data: &PencilData) -> Result<SliceMatrix> {
    let eng = Engine::new(spec, data)?;
    let gens = eng.generators(spec.p, spec.d, spec.k, spec.l, true)?;
    eng.check_images(&gens, spec.k)?;
    let kc = spec.k + eng.fdeg + usize::from(spec.truncation == Truncation::Coefficient);
    let domain_basis: Vec<BasisKey> = match spec.space {
        Space::DCi(_) => gens.iter().flat_map(|g| g.coords.first().map(|c| c.0.clone())).collect(),
        _ => gens.iter().map(|g| g.coords[0].0.clone()).collect(),
    };
    let mut rows: Vec<BasisKey> = gens.iter().flat_map(|g| g.image.iter().map(|(k, _)| k.clone())).collect();
    rows.sort();
    rows.dedup();
    let pos: HashMap<&BasisKey, usize> = rows.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut matrix = SparseMatrix::new(rows.len());
    for g in &gens {
        let mut col: BTreeMap<usize, Rat> = BTreeMap::new();
        for (k, x) in &g.image {
            *col.entry(pos[k]).or_insert_with(|| Rat::from_integer(0.into())) += x;
        }
        matrix.push_col(col);
    }
    Ok(SliceMatrix { domain: *spec, codomain_window: (kc, spec.l + 1), domain_basis, codomain_basis: rows, matrix })
}

/// Dimensions for one `(K, L)` window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowRow {
    pub k: usize,
    pub l: usize,
    /// Dimension of the window modulo the quotient subspace.
    pub dim_space: usize,
    pub dim_ker: usize,
    pub dim_im: usize,
    pub dim_h: usize,
}

/// Value of `dim H` once one window bound is held fixed and the other raised
/// until two consecutive windows agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stable {
    /// The bound held fixed.
    pub fixed: usize,
    /// `None` when no two consecutive windows agreed below the scan cap: a boundary degree.
    pub dim_h: Option<usize>,
    /// First value of the moving bound at which the value repeated.
    pub from: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyReport {
    pub p: i64,
    pub d: i64,
    pub space: Space,
    pub differential: OperatorId,
    pub rows: Vec<WindowRow>,
    /// One entry per `K` of the table, scanning `L`.
    pub stable_in_l: Vec<Stable>,
    /// One entry per `L` of the table, scanning `K`.
    pub stable_in_k: Vec<Stable>,
}

impl CohomologyReport {
    pub fn get(&self, k: usize, l: usize) -> Option<&WindowRow> {
        self.rows.iter().find(|r| r.k == k && r.l == l)
    }

    /// Stable `dim H` at fixed `K`.
    pub fn stable_at_k(&self, k: usize) -> Option<usize> {
        self.stable_in_l.iter().find(|s| s.fixed == k).and_then(|s| s.dim_h)
    }

    /// Stable `dim H` at fixed `L`.
    pub fn stable_at_l(&self, l: usize) -> Option<usize> {
        self.stable_in_k.iter().find(|s| s.fixed == l).and_then(|s| s.dim_h)
    }

    /// True if every window in the table has vanishing cohomology.
    pub fn vanishes(&self) -> bool {
        self.rows.iter().all(|r| r.dim_h == 0)
    }
}

/// How far past the table a scan may go.
const SCAN_MARGIN: usize = 3;

struct Table<'a> {
    eng: &'a Engine,
    p: i64,
    d: i64,
    memo: HashMap<(usize, usize), WindowRow>,
}

impl Table<'_> {
    fn row(&mut self, k: usize, l: usize) -> Result<WindowRow> {
        if let Some(r) = self.memo.get(&(k, l)) {
            return Ok(*r);
        }
        let r = self.eng.row(self.p, self.d, k, l)?;
        self.memo.insert((k, l), r);
        Ok(r)
    }

    fn scan(&mut self, fixed: usize, cap: usize, at: impl Fn(usize) -> (usize, usize)) -> Result<Stable> {
        let mut prev = None;
        for x in 0..=cap {
            let (k, l) = at(x);
            let h = self.row(k, l)?.dim_h;
            if prev == Some(h) {
                return Ok(Stable { fixed, dim_h: Some(h), from: x - 1 });
            }
            prev = Some(h);
        }
        Ok(Stable { fixed, dim_h: None, from: cap })
    }
}

/// `dim H` on every weighted window `K' <= K`, `L' <= L` of `at`, with
/// stabilization scans in both bounds. `incoming` must be the window one
/// bidegree lower in the same space with the same differential.
pub fn cohomology_dim(at: &SliceSpec, incoming: &SliceSpec, data: &PencilData) -> Result<CohomologyReport> {
    if incoming.p + 1 != at.p
        || incoming.d + 1 != at.d
        || incoming.space != at.space
        || incoming.differential != at.differential
        || incoming.l != at.l
    {
        return Err(Error::Range("incoming slice does not map into the target slice".into()));
    }
    let eng = Engine::new(&at.weighted(), data)?;
    if incoming.k != at.k.saturating_sub(eng.fdeg) {
        return Err(Error::Range(format!("incoming window must have K = {} - {}", at.k, eng.fdeg)));
    }
    let mut t = Table { eng: &eng, p: at.p, d: at.d, memo: HashMap::new() };
    let mut rows = Vec::new();
    for k in 0..=at.k {
        for l in 0..=at.l {
            rows.push(t.row(k, l)?);
        }
    }
    let mut stable_in_l = Vec::new();
    for k in 0..=at.k {
        stable_in_l.push(t.scan(k, at.l.max(k + 1) + SCAN_MARGIN, |l| (k, l))?);
    }
    let mut stable_in_k = Vec::new();
    for l in 0..=at.l {
        stable_in_k.push(t.scan(l, at.k.max(l + 1) + SCAN_MARGIN, |k| (k, l))?);
    }
    Ok(CohomologyReport { p: at.p, d: at.d, space: at.space, differential: at.differential, rows, stable_in_l, stable_in_k })
}

/// `cohomology_dim` with the incoming window filled in.
pub fn slice_cohomology(at: &SliceSpec, data: &PencilData) -> Result<CohomologyReport> {
    let m = data.max_f_degree()? as usize;
    let incoming = SliceSpec { p: at.p - 1, d: at.d - 1, k: at.k.saturating_sub(m), ..*at };
    cohomology_dim(at, &incoming, data)
}

/// Cohomology of local functionals under `D_lambda` at `(p, d)`, `d >= 2`.
pub fn bh_slice(data: &PencilData, p: i64, d: i64, k: usize, l: usize) -> Result<CohomologyReport> {
    if d < 2 {
        return Err(Error::Range(format!("functional slices need d >= 2, got {d}")));
    }
    slice_cohomology(&SliceSpec::new(p, d, k, l, Space::FHat, OperatorId::DLambda), data)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RepresentativeReport {
    pub cocycle: bool,
    pub coboundary: bool,
}

impl RepresentativeReport {
    /// A cocycle that is not a coboundary: a nonzero class.
    pub fn is_class(&self) -> bool {
        self.cocycle && !self.coboundary
    }
}

/// Is `candidate` closed under `diff`, and does it lie in the image of the
/// incoming window (plus the quotient subspace of the space)?
pub fn verify_representative(
    data: &PencilData,
    candidate: &Element<CoeffFn>,
    diff: OperatorId,
    modulo_incoming: &SliceSpec,
) -> Result<RepresentativeReport> {
    let spec = SliceSpec { differential: diff, ..*modulo_incoming }.weighted();
    let eng = Engine::new(&spec, data)?;
    let closed = eng.apply_diff(candidate)?;
    let cocycle = match spec.space {
        Space::FHat => Functional::new(closed).is_zero(),
        _ => closed.is_zero(),
    };
    let (p, d) = (spec.p + 1, spec.d + 1);
    let inc = eng.generators(spec.p, spec.d, spec.k, spec.l, true)?;
    let top = coordinates(candidate)?.iter().map(|(k, _)| k.2 as usize).max().unwrap_or(0);
    let l = spec.l.max(top);
    let mut e = Echelon::new();
    for b in eng.boundaries(p, d, spec.k + eng.fdeg, l)? {
        e.insert(eng.vector(&b, l));
    }
    for g in &inc {
        e.insert(eng.vector(&g.image, l));
    }
    let coboundary = e.contains(&eng.vector(&coordinates(candidate)?, l));
    Ok(RepresentativeReport { cocycle, coboundary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize) -> PencilData {
        PencilData::flat(n)
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(u_monomials(1, 3).len(), 4);
        assert_eq!(u_monomials(2, 2).len(), 6);
        assert_eq!(u_monomials(3, 0), vec![Mono::one()]);
    }

    #[test]
    fn first_order_matrix() {
        let spec = SliceSpec::new(0, 1, 0, 0, Space::AFull, OperatorId::DeltaMinus1);
        let m = assemble(&spec, &flat(1)).unwrap();
        assert_eq!(m.ncols(), 1);
        assert_eq!(m.matrix.nnz(), 2);
        assert_eq!(exact_rank(&m), 1);
    }

    #[test]
    fn top_slice_dimension() {
        for (k, l) in [(0, 0), (2, 1), (3, 3)] {
            let spec = SliceSpec::new(3, 3, k, l, Space::AFull, OperatorId::DLambda);
            assert_eq!(assemble(&spec, &flat(1)).unwrap().ncols(), (k + 1) * (l + 1));
        }
    }

    #[test]
    fn empty_slice() {
        let spec = SliceSpec::new(0, -1, 2, 2, Space::AFull, OperatorId::DLambda);
        let m = assemble(&spec, &flat(1)).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (0, 0));
        assert_eq!(exact_rank(&m), 0);
    }

    #[test]
    fn functional_slices_need_order_two() {
        assert!(matches!(bh_slice(&flat(1), 1, 1, 1, 1), Err(Error::Range(_))));
    }

    #[test]
    fn incompatible_space() {
        let spec = SliceSpec::new(1, 1, 1, 1, Space::DCi(0), OperatorId::DLambda);
        assert!(assemble(&spec, &flat(2)).is_err());
    }
}
