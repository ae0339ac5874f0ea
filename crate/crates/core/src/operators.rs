//! The operator catalog acting on jet-algebra elements.
//!
//! Every operator is built from its own explicit formula; agreement between
//! alternative routes (components of `D_lambda` against the `Delta` formulas,
//! conjugated forms against tilde forms) is checked in tests, never assumed.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::jet::{subspace_classify, weight, Element, Gen, Grading, SubspaceClass};
use crate::pencil::Pencil;
use crate::rat::{binomial, int, rat, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorId {
    /// `D(f^1, ..., f^N)`, the differential of the first metric.
    DFirst,
    /// `D(u^1 f^1, ..., u^N f^N)`.
    DSecond,
    DLambda,
    DeltaMinus1,
    Dhat(usize),
    Delta0,
    Delta01Tilde,
    Delta01,
    Delta00,
    Delta0Minus1,
    DiTilde(usize),
    Di(usize),
    DiTildePrime(usize),
    /// `deltahat_k^i`.
    DeltaHat(usize, usize),
    Di1(usize),
    Delta0Up1,
    Delta011,
    Delta010,
    DeltaBar,
    Euler(usize),
}

impl OperatorId {
    /// Shift in (theta-degree, standard degree).
    pub fn bidegree_shift(&self) -> (i64, i64) {
        match self {
            OperatorId::DeltaHat(..) | OperatorId::Euler(_) => (0, 0),
            _ => (1, 1),
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        match *self {
            OperatorId::Dhat(i)
            | OperatorId::DiTilde(i)
            | OperatorId::Di(i)
            | OperatorId::DiTildePrime(i)
            | OperatorId::Di1(i)
            | OperatorId::Euler(i) => vec![i],
            OperatorId::DeltaHat(k, i) => vec![k, i],
            _ => vec![],
        }
    }
}

impl fmt::Display for OperatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            OperatorId::DFirst => write!(f, "D1"),
            OperatorId::DSecond => write!(f, "D2"),
            OperatorId::DLambda => write!(f, "D_lambda"),
            OperatorId::DeltaMinus1 => write!(f, "Delta_minus1"),
            OperatorId::Dhat(i) => write!(f, "dhat({})", i + 1),
            OperatorId::Delta0 => write!(f, "Delta0"),
            OperatorId::Delta01Tilde => write!(f, "Delta01_tilde"),
            OperatorId::Delta01 => write!(f, "Delta01"),
            OperatorId::Delta00 => write!(f, "Delta00"),
            OperatorId::Delta0Minus1 => write!(f, "Delta0_minus1"),
            OperatorId::DiTilde(i) => write!(f, "Di_tilde({})", i + 1),
            OperatorId::Di(i) => write!(f, "Di({})", i + 1),
            OperatorId::DiTildePrime(i) => write!(f, "Di_tilde_prime({})", i + 1),
            OperatorId::DeltaHat(k, i) => write!(f, "deltahat({},{})", k + 1, i + 1),
            OperatorId::Di1(i) => write!(f, "Di_1({})", i + 1),
            OperatorId::Delta0Up1 => write!(f, "Delta0_up1"),
            OperatorId::Delta011 => write!(f, "Delta0_11"),
            OperatorId::Delta010 => write!(f, "Delta0_10"),
            OperatorId::DeltaBar => write!(f, "Delta_bar"),
            OperatorId::Euler(i) => write!(f, "Euler({})", i + 1),
        }
    }
}

impl FromStr for OperatorId {
    type Err = Error;

    /// Names as printed by `Display`; indices are 1-based.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Range(format!("unknown operator '{s}'"));
        let (name, args) = match s.find('(') {
            Some(p) if s.ends_with(')') => (&s[..p], &s[p + 1..s.len() - 1]),
            Some(_) => return Err(bad()),
            None => (s, ""),
        };
        let idx: Vec<usize> = if args.is_empty() {
            vec![]
        } else {
            args.split(',')
                .map(|x| x.trim().parse::<usize>().ok().filter(|&v| v >= 1).map(|v| v - 1))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(bad)?
        };
        let one = || if idx.len() == 1 { Ok(idx[0]) } else { Err(bad()) };
        Ok(match name {
            "D1" if idx.is_empty() => OperatorId::DFirst,
            "D2" if idx.is_empty() => OperatorId::DSecond,
            "D_lambda" if idx.is_empty() => OperatorId::DLambda,
            "Delta_minus1" if idx.is_empty() => OperatorId::DeltaMinus1,
            "Delta0" if idx.is_empty() => OperatorId::Delta0,
            "Delta01_tilde" if idx.is_empty() => OperatorId::Delta01Tilde,
            "Delta01" if idx.is_empty() => OperatorId::Delta01,
            "Delta00" if idx.is_empty() => OperatorId::Delta00,
            "Delta0_minus1" if idx.is_empty() => OperatorId::Delta0Minus1,
            "Delta0_up1" if idx.is_empty() => OperatorId::Delta0Up1,
            "Delta0_11" if idx.is_empty() => OperatorId::Delta011,
            "Delta0_10" if idx.is_empty() => OperatorId::Delta010,
            "Delta_bar" if idx.is_empty() => OperatorId::DeltaBar,
            "dhat" => OperatorId::Dhat(one()?),
            "Di_tilde" => OperatorId::DiTilde(one()?),
            "Di" => OperatorId::Di(one()?),
            "Di_tilde_prime" => OperatorId::DiTildePrime(one()?),
            "Di_1" => OperatorId::Di1(one()?),
            "Euler" => OperatorId::Euler(one()?),
            "deltahat" if idx.len() == 2 => OperatorId::DeltaHat(idx[0], idx[1]),
            _ => return Err(bad()),
        })
    }
}

enum Kind<C: Coeff> {
    /// `sum_s d^s(q_i) d/du^{i,s} + sum_s d^s(r_i) d/dtheta_i^s`.
    Evolutionary { q: Vec<Element<C>>, r: Vec<Element<C>> },
    /// `sum_i c_i dhat_i` with `dhat_i = sum_{s>=1} theta_i^{s+1} d/du^{i,s}`.
    Dhat(Vec<C>),
    Delta0Formula,
    /// `1/2 sum_i t_i sum_{s in range} theta_i^{s+1} d/dtheta_i^s`.
    ThetaShift { t: Vec<Element<C>>, smin: usize, smax: Option<usize> },
    /// Finitely many components plus `sum X_k E_k` terms.
    Explicit { comps: HashMap<Gen, Element<C>>, euler: Vec<(usize, Element<C>)> },
    Conjugated(Box<Operator<C>>),
    /// The part of `base` raising `deg_theta1` by `shift`.
    Theta1Component { base: Box<Operator<C>>, shift: i64 },
    Euler(usize),
}

pub struct Operator<C: Coeff> {
    id: OperatorId,
    pencil: Pencil<C>,
    kind: Kind<C>,
    cache: Mutex<HashMap<Gen, Element<C>>>,
}

fn th<C: Coeff>(n: usize, i: usize, s: usize) -> Element<C> {
    Element::theta(n, i, s)
}

fn uj<C: Coeff>(n: usize, i: usize, s: usize) -> Element<C> {
    Element::u(n, i, s)
}

fn half() -> Rat {
    rat(1, 2)
}

impl<C: Coeff> Operator<C> {
    pub fn new(p: &Pencil<C>, id: OperatorId) -> Result<Self> {
        for i in id.indices() {
            p.check_index(i)?;
        }
        let n = p.n();
        let kind = match id {
            OperatorId::DFirst => {
                let g: Vec<C> = (0..n).map(|i| p.f(i).clone()).collect();
                Operator::d_g_kind(p, &g)?
            }
            OperatorId::DSecond => {
                let g: Vec<C> = (0..n).map(|i| C::u(i).mul(p.f(i))).collect();
                Operator::d_g_kind(p, &g)?
            }
            OperatorId::DLambda => Operator::d_lambda_kind(p),
            OperatorId::DeltaMinus1 => Kind::Dhat((0..n).map(|i| C::u_minus_lambda(i).mul(p.f(i))).collect()),
            OperatorId::Dhat(i) => Kind::Dhat((0..n).map(|j| if j == i { C::one() } else { C::zero() }).collect()),
            OperatorId::Delta0 => Kind::Delta0Formula,
            OperatorId::Delta01 | OperatorId::Delta00 => Kind::Theta1Component {
                base: Box::new(Operator::new(p, OperatorId::Delta0)?),
                shift: if id == OperatorId::Delta01 { 1 } else { 0 },
            },
            OperatorId::Delta0Minus1 => Operator::delta0_minus1_kind(p),
            OperatorId::Delta01Tilde => Operator::delta01_tilde_kind(p)?,
            OperatorId::DiTilde(i) => Operator::di_tilde_kind(p, i, false)?,
            OperatorId::DiTildePrime(i) => Operator::di_tilde_kind(p, i, true)?,
            OperatorId::DeltaHat(k, i) => Operator::deltahat_kind(p, k, i)?,
            OperatorId::Di(i) => {
                p.h(0)?;
                Kind::Conjugated(Box::new(Operator::new(p, OperatorId::DiTilde(i))?))
            }
            OperatorId::Di1(i) => {
                p.h(0)?;
                let inner = Operator { id, pencil: p.clone(), kind: Operator::di1_tilde_kind(p, i)?, cache: Mutex::default() };
                Kind::Conjugated(Box::new(inner))
            }
            OperatorId::Delta0Up1 | OperatorId::Delta011 | OperatorId::Delta010 => {
                let t = (0..n).map(|i| p.theta_tilde(i)).collect();
                let (smin, smax) = match id {
                    OperatorId::Delta0Up1 => (1, None),
                    OperatorId::Delta011 => (1, Some(1)),
                    _ => (2, None),
                };
                Kind::ThetaShift { t, smin, smax }
            }
            OperatorId::DeltaBar => Operator::delta_bar_kind(p)?,
            OperatorId::Euler(i) => Kind::Euler(i),
        };
        Ok(Operator { id, pencil: p.clone(), kind, cache: Mutex::default() })
    }

    /// `D(g)` for an arbitrary vector `g`.
    pub fn d_g(p: &Pencil<C>, g: &[C]) -> Result<Self> {
        if g.len() != p.n() {
            return Err(Error::InvalidPencil(format!("expected {} entries, got {}", p.n(), g.len())));
        }
        Ok(Operator { id: OperatorId::DFirst, pencil: p.clone(), kind: Operator::d_g_kind(p, g)?, cache: Mutex::default() })
    }

    pub fn id(&self) -> OperatorId {
        self.id
    }

    pub fn pencil(&self) -> &Pencil<C> {
        &self.pencil
    }

    fn d_g_kind(p: &Pencil<C>, g: &[C]) -> Result<Kind<C>> {
        let n = p.n();
        // dg[j][i] = d_j g^i, r[i][j] = g^i d_i g^j / g^j
        let dg: Vec<Vec<C>> = (0..n).map(|j| (0..n).map(|i| g[i].partial(j, n)).collect()).collect();
        let mut r = vec![vec![C::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                r[i][j] = g[i].mul(&dg[i][j].checked_div(&g[j])?);
            }
        }
        Ok(Operator::structure_kind(n, g, &dg, &r))
    }

    fn d_lambda_kind(p: &Pencil<C>) -> Kind<C> {
        let n = p.n();
        let g: Vec<C> = (0..n).map(|i| C::u_minus_lambda(i).mul(p.f(i))).collect();
        let mut dg = vec![vec![C::zero(); n]; n];
        let mut r = vec![vec![C::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                // d_j g^i = delta_ij f^i + (u^i - lambda) d_j f^i
                let mut d = C::u_minus_lambda(i).mul(p.df(j, i));
                // r_ij = (u^i - lambda) f^i L(i,j) + delta_ij f^i
                let mut x = C::u_minus_lambda(i).mul(p.f(i)).mul(p.l(i, j));
                if i == j {
                    d = d.add(p.f(i));
                    x = x.add(p.f(i));
                }
                dg[j][i] = d;
                r[i][j] = x;
            }
        }
        Operator::structure_kind(n, &g, &dg, &r)
    }

    fn structure_kind(n: usize, g: &[C], dg: &[Vec<C>], r: &[Vec<C>]) -> Kind<C> {
        let h = half();
        let mut q = Vec::with_capacity(n);
        let mut rr = Vec::with_capacity(n);
        for i in 0..n {
            let mut qi = th(n, i, 1).mul_coeff(&g[i]);
            for j in 0..n {
                let a = uj(n, j, 1).mul(&th(n, i, 0)).mul_coeff(&dg[j][i].mul(&C::from_rat(h.clone())));
                let b = uj(n, j, 1).mul(&th(n, j, 0)).mul_coeff(&r[i][j].scale(&h));
                let c = uj(n, i, 1).mul(&th(n, j, 0)).mul_coeff(&r[j][i].scale(&h));
                qi = qi.add(&a).add(&b).sub(&c);
            }
            q.push(qi);
        }
        for i in 0..n {
            let mut ri = Element::zero(n);
            for j in 0..n {
                ri.add_assign(&th(n, j, 0).mul(&th(n, j, 1)).mul_coeff(&dg[i][j].scale(&h)));
                ri.add_assign(&th(n, i, 0).mul(&th(n, j, 1)).mul_coeff(&r[j][i].scale(&h)));
                ri.add_assign(&th(n, j, 0).mul(&th(n, i, 1)).mul_coeff(&r[j][i].scale(&h).neg()));
            }
            for j in 0..n {
                for k in 0..n {
                    let a = r[k][j].partial(i, n).scale(&h);
                    ri.add_assign(&uj(n, j, 1).mul(&th(n, k, 0)).mul(&th(n, j, 0)).mul_coeff(&a));
                    let b = r[k][i].partial(j, n).scale(&h).neg();
                    ri.add_assign(&uj(n, j, 1).mul(&th(n, k, 0)).mul(&th(n, i, 0)).mul_coeff(&b));
                }
            }
            rr.push(ri);
        }
        Kind::Evolutionary { q, r: rr }
    }

    fn delta0_minus1_kind(p: &Pencil<C>) -> Kind<C> {
        let n = p.n();
        let h = half();
        let mut comps = HashMap::new();
        for i in 0..n {
            let mut x = th(n, i, 0).mul(&th(n, i, 2)).mul_coeff(p.f(i));
            for j in 0..n {
                let ul = C::u_minus_lambda(j);
                x.add_assign(&th(n, j, 0).mul(&th(n, j, 2)).mul_coeff(&ul.mul(p.df(i, j))));
                let k = ul.mul(p.f(j)).mul(p.l(j, i));
                x.add_assign(&th(n, i, 0).mul(&th(n, j, 2)).sub(&th(n, j, 0).mul(&th(n, i, 2))).mul_coeff(&k));
            }
            comps.insert(Gen::Theta(i, 1), x.scale(&h));
        }
        Kind::Explicit { comps, euler: vec![] }
    }

    fn delta01_tilde_kind(p: &Pencil<C>) -> Result<Kind<C>> {
        let n = p.n();
        let mut comps = HashMap::new();
        for i in 0..n {
            comps.insert(Gen::U(i, 0), th(n, i, 1).mul_coeff(&C::u_minus_lambda(i)));
            let mut x = Element::zero(n);
            for j in (0..n).filter(|&j| j != i) {
                let ul = C::u_minus_lambda(j);
                let a = th(n, j, 1).mul_coeff(&p.gamma(i, j)?).sub(&th(n, i, 1).mul_coeff(&p.gamma(j, i)?));
                x.add_assign(&a.mul(&th(n, j, 0)).mul_coeff(&ul));
            }
            comps.insert(Gen::Theta(i, 0), x);
        }
        let euler = (0..n).map(|i| (i, th(n, i, 1))).collect();
        Ok(Kind::Explicit { comps, euler })
    }

    /// `Di_tilde(i)`, or its primed restriction dropping the terms that lower `deg theta_i^0`.
    fn di_tilde_kind(p: &Pencil<C>, i: usize, prime: bool) -> Result<Kind<C>> {
        let n = p.n();
        let mut comps: HashMap<Gen, Element<C>> = HashMap::new();
        let ks: Vec<usize> = (0..n).filter(|&k| !prime || k != i).collect();
        for &k in &ks {
            // theta_k^1 (u^k - u^i) d/du^k
            let ukui = C::u(k).sub(&C::u(i));
            comps.entry(Gen::U(k, 0)).or_insert_with(|| Element::zero(n)).add_assign(&th(n, k, 1).mul_coeff(&ukui));
            // theta_k^1 (u^k - u^i) gamma_jk theta_k^0 d/dtheta_j^0
            for j in (0..n).filter(|&j| j != k && (!prime || j != i)) {
                let x = th(n, k, 1).mul(&th(n, k, 0)).mul_coeff(&ukui.mul(&p.gamma(j, k)?));
                comps.entry(Gen::Theta(j, 0)).or_insert_with(|| Element::zero(n)).add_assign(&x);
            }
            // theta_k^1 (u^i - u^j) gamma_jk theta_j^0 d/dtheta_k^0
            for j in (0..n).filter(|&j| j != k) {
                let x = th(n, k, 1).mul(&th(n, j, 0)).mul_coeff(&C::u(i).sub(&C::u(j)).mul(&p.gamma(j, k)?));
                comps.entry(Gen::Theta(k, 0)).or_insert_with(|| Element::zero(n)).add_assign(&x);
            }
        }
        let euler = ks.iter().map(|&k| (k, th(n, k, 1))).collect();
        Ok(Kind::Explicit { comps, euler })
    }

    /// Coefficient of `theta_k^1` in the primed operator, an even operator.
    fn deltahat_kind(p: &Pencil<C>, k: usize, i: usize) -> Result<Kind<C>> {
        if k == i {
            return Err(Error::EqualIndices(k));
        }
        let n = p.n();
        let mut comps: HashMap<Gen, Element<C>> = HashMap::new();
        let ukui = C::u(k).sub(&C::u(i));
        comps.insert(Gen::U(k, 0), Element::from_coeff(n, ukui.clone()));
        for j in (0..n).filter(|&j| j != k && j != i) {
            let x = th(n, k, 0).mul_coeff(&ukui.mul(&p.gamma(j, k)?));
            comps.entry(Gen::Theta(j, 0)).or_insert_with(|| Element::zero(n)).add_assign(&x);
        }
        for j in (0..n).filter(|&j| j != k) {
            let x = th(n, j, 0).mul_coeff(&C::u(i).sub(&C::u(j)).mul(&p.gamma(j, k)?));
            comps.entry(Gen::Theta(k, 0)).or_insert_with(|| Element::zero(n)).add_assign(&x);
        }
        Ok(Kind::Explicit { comps, euler: vec![(k, Element::one(n))] })
    }

    fn di1_tilde_kind(p: &Pencil<C>, i: usize) -> Result<Kind<C>> {
        let n = p.n();
        let mut x = Element::zero(n);
        for j in (0..n).filter(|&j| j != i) {
            x.add_assign(&th(n, i, 1).mul(&th(n, j, 0)).mul_coeff(&C::u(i).sub(&C::u(j)).mul(&p.gamma(j, i)?)));
        }
        let mut comps = HashMap::new();
        comps.insert(Gen::Theta(i, 0), x);
        Ok(Kind::Explicit { comps, euler: vec![(i, th(n, i, 1))] })
    }

    fn delta_bar_kind(p: &Pencil<C>) -> Result<Kind<C>> {
        let n = p.n();
        let mut comps: HashMap<Gen, Element<C>> = HashMap::new();
        for i in 0..n {
            let ul = C::u_minus_lambda(i);
            comps.insert(Gen::U(i, 0), th(n, i, 1).mul_coeff(&ul));
            for j in (0..n).filter(|&j| j != i) {
                let g = ul.mul(&p.gamma(j, i)?);
                // (u^i - lambda) gamma_ji theta_i^1 theta_i^0 d/dtheta_j^0
                let a = th(n, i, 1).mul(&th(n, i, 0)).mul_coeff(&g);
                comps.entry(Gen::Theta(j, 0)).or_insert_with(|| Element::zero(n)).add_assign(&a);
                // -(u^i - lambda) gamma_ji theta_i^1 theta_j^0 d/dtheta_i^0
                let b = th(n, i, 1).mul(&th(n, j, 0)).mul_coeff(&g.neg());
                comps.entry(Gen::Theta(i, 0)).or_insert_with(|| Element::zero(n)).add_assign(&b);
            }
            let c = p.theta_bar(i)?.mul(&th(n, i, 1)).scale(&half());
            comps.entry(Gen::Theta(i, 0)).or_insert_with(|| Element::zero(n)).add_assign(&c);
        }
        Ok(Kind::Explicit { comps, euler: vec![] })
    }

    /// Component of the closed deg_u zero formula along a generator.
    fn delta0_component(&self, g: Gen) -> Element<C> {
        let p = &self.pencil;
        let n = p.n();
        let h = half();
        let mut out = Element::zero(n);
        match g {
            Gen::U(i, 0) => out = th(n, i, 1).mul_coeff(&C::u_minus_lambda(i).mul(p.f(i))),
            Gen::U(i, s) => {
                let uli = C::u_minus_lambda(i);
                for a in 0..=s {
                    let b = s - a;
                    let c = binomial(s, b);
                    if a >= 1 {
                        for j in 0..n {
                            let k = uli.mul(p.df(j, i)).scale(&c);
                            out.add_assign(&uj(n, j, a).mul(&th(n, i, 1 + b)).mul_coeff(&k));
                        }
                        out.add_assign(&uj(n, i, a).mul(&th(n, i, 1 + b)).mul_coeff(&p.f(i).scale(&c)));
                    }
                    let ch = &c * &h;
                    for j in 0..n {
                        let k4 = uli.mul(p.df(j, i)).scale(&ch);
                        out.add_assign(&uj(n, j, 1 + a).mul(&th(n, i, b)).mul_coeff(&k4));
                        let k6 = uli.mul(p.f(i)).mul(p.l(i, j)).scale(&ch);
                        out.add_assign(&uj(n, j, 1 + a).mul(&th(n, j, b)).mul_coeff(&k6));
                        let k8 = C::u_minus_lambda(j).mul(p.f(j)).mul(p.l(j, i)).scale(&ch).neg();
                        out.add_assign(&uj(n, i, 1 + a).mul(&th(n, j, b)).mul_coeff(&k8));
                    }
                    // the three single-index terms with weights 1/2, 1/2, -1/2
                    let fi = p.f(i).scale(&ch);
                    let t = uj(n, i, 1 + a).mul(&th(n, i, b));
                    out.add_assign(&t.mul_coeff(&fi));
                    out.add_assign(&t.mul_coeff(&fi));
                    out.add_assign(&t.mul_coeff(&fi.neg()));
                }
            }
            Gen::Theta(i, s) => {
                for a in 0..=s {
                    let b = s - a;
                    let ch = binomial(s, b) * &h;
                    for j in 0..n {
                        let ulj = C::u_minus_lambda(j);
                        let k10 = ulj.mul(p.df(i, j)).scale(&ch);
                        out.add_assign(&th(n, j, a).mul(&th(n, j, 1 + b)).mul_coeff(&k10));
                        let k12 = ulj.mul(p.f(j)).mul(p.l(j, i)).scale(&ch);
                        out.add_assign(&th(n, i, a).mul(&th(n, j, 1 + b)).mul_coeff(&k12));
                        out.add_assign(&th(n, j, a).mul(&th(n, i, 1 + b)).mul_coeff(&k12.neg()));
                    }
                    let fi = p.f(i).scale(&ch);
                    let t = th(n, i, a).mul(&th(n, i, 1 + b));
                    out.add_assign(&t.mul_coeff(&fi));
                    out.add_assign(&t.mul_coeff(&fi));
                    out.add_assign(&t.mul_coeff(&fi.neg()));
                }
            }
        }
        out
    }

    fn component(&self, g: Gen) -> Option<Element<C>> {
        if let Some(hit) = self.cache.lock().unwrap().get(&g) {
            return Some(hit.clone());
        }
        let n = self.pencil.n();
        let v = match &self.kind {
            Kind::Evolutionary { q, r } => match g {
                Gen::U(i, 0) => q[i].clone(),
                Gen::Theta(i, 0) => r[i].clone(),
                Gen::U(i, s) => self.component(Gen::U(i, s - 1))?.dx(),
                Gen::Theta(i, s) => self.component(Gen::Theta(i, s - 1))?.dx(),
            },
            Kind::Dhat(c) => match g {
                Gen::U(i, s) if s >= 1 && !c[i].is_zero() => th(n, i, s + 1).mul_coeff(&c[i]),
                _ => return None,
            },
            Kind::Delta0Formula => self.delta0_component(g),
            Kind::ThetaShift { t, smin, smax } => match g {
                Gen::Theta(i, s) if s >= *smin && smax.is_none_or(|m| s <= m) => t[i].mul(&th(n, i, s + 1)).scale(&half()),
                _ => return None,
            },
            Kind::Explicit { comps, .. } => return comps.get(&g).cloned(),
            _ => return None,
        };
        self.cache.lock().unwrap().insert(g, v.clone());
        Some(v)
    }

    pub fn apply(&self, a: &Element<C>) -> Result<Element<C>> {
        match &self.kind {
            Kind::Conjugated(inner) => {
                let b = self.pencil.psi(a, true)?;
                self.pencil.psi(&inner.apply(&b)?, false)
            }
            Kind::Theta1Component { base, shift } => {
                let mut out = Element::zero(a.n());
                for k in a.degrees(Grading::Theta1) {
                    let part = a.homogeneous_component(Grading::Theta1, k);
                    out.add_assign(&base.apply(&part)?.homogeneous_component(Grading::Theta1, k + shift));
                }
                Ok(out)
            }
            Kind::Euler(i) => Ok(euler(a, *i)),
            Kind::Explicit { euler: eu, .. } => {
                let mut out = a.apply_derivation(&mut |g| self.component(g));
                for (k, x) in eu {
                    out.add_assign(&x.mul(&euler(a, *k)));
                }
                Ok(out)
            }
            _ => Ok(a.apply_derivation(&mut |g| self.component(g))),
        }
    }
}

/// The square of an odd derivation, evaluated through its values on
/// generators: `X^2` is an even derivation whose component along `g` is `X(X(g))`.
pub struct Square<'a, C: Coeff> {
    op: &'a Operator<C>,
    cache: Mutex<HashMap<Gen, Element<C>>>,
}

impl<'a, C: Coeff> Square<'a, C> {
    pub fn new(op: &'a Operator<C>) -> Result<Self> {
        let derivation = match &op.kind {
            Kind::Explicit { euler, .. } => euler.is_empty(),
            Kind::Conjugated(_) | Kind::Theta1Component { .. } | Kind::Euler(_) => false,
            _ => true,
        };
        if !derivation {
            return Err(Error::NotADerivation(op.id.to_string()));
        }
        Ok(Square { op, cache: Mutex::default() })
    }

    /// `X(X(g))`, coefficients normalized.
    pub fn component(&self, g: Gen) -> Result<Element<C>> {
        if let Some(hit) = self.cache.lock().unwrap().get(&g) {
            return Ok(hit.clone());
        }
        let n = self.op.pencil.n();
        let evolutionary = matches!(self.op.kind, Kind::Evolutionary { .. });
        let v = match g {
            // an evolutionary square commutes with d_x
            Gen::U(i, s) if evolutionary && s > 0 => self.component(Gen::U(i, s - 1))?.dx(),
            Gen::Theta(i, s) if evolutionary && s > 0 => self.component(Gen::Theta(i, s - 1))?.dx(),
            _ => self.direct(g)?,
        }
        .map_coeffs(|c| c.normalize(n));
        self.cache.lock().unwrap().insert(g, v.clone());
        Ok(v)
    }

    /// `X(X(g))` by two applications, bypassing the cache.
    pub fn direct(&self, g: Gen) -> Result<Element<C>> {
        let n = self.op.pencil.n();
        let gen = match g {
            Gen::U(i, s) => Element::u(n, i, s),
            Gen::Theta(i, s) => Element::theta(n, i, s),
        };
        Ok(self.op.apply(&self.op.apply(&gen)?)?.map_coeffs(|c| c.normalize(n)))
    }

    pub fn apply(&self, a: &Element<C>) -> Result<Element<C>> {
        let mut gens: Vec<Gen> = (0..a.n()).map(|i| Gen::U(i, 0)).collect();
        for m in a.terms().map(|(m, _)| m) {
            gens.extend(m.generators());
        }
        gens.sort();
        gens.dedup();
        let mut comps = HashMap::new();
        for g in gens {
            comps.insert(g, self.component(g)?);
        }
        let n = a.n();
        Ok(a.apply_derivation(&mut |g| comps.get(&g).cloned()).map_coeffs(|c| c.normalize(n)))
    }
}

/// Multiply every monomial by its weight `w_i`.
pub fn euler<C: Coeff>(a: &Element<C>, i: usize) -> Element<C> {
    let mut out = Element::zero(a.n());
    for (m, c) in a.terms() {
        out.add_term(m.clone(), c.scale(&weight(m, i)));
    }
    out
}

pub fn apply<C: Coeff>(p: &Pencil<C>, id: OperatorId, a: &Element<C>) -> Result<Element<C>> {
    Operator::new(p, id)?.apply(a)
}

/// Residuals of the `deg_u` split of `D_lambda` against the two formulas.
#[derive(Clone, Debug)]
pub struct SplitReport<C: Coeff> {
    pub minus1: Element<C>,
    pub zero: Element<C>,
}

impl<C: Coeff> SplitReport<C> {
    pub fn passed(&self) -> bool {
        self.minus1.is_zero() && self.zero.is_zero()
    }
}

/// Compare the `deg_u = -1` and `0` components of `D_lambda(a)` with the two formulas.
pub fn split_check_degu<C: Coeff>(p: &Pencil<C>, a: &Element<C>) -> Result<SplitReport<C>> {
    let d = Operator::new(p, OperatorId::DLambda)?;
    let dm1 = Operator::new(p, OperatorId::DeltaMinus1)?;
    let d0 = Operator::new(p, OperatorId::Delta0)?;
    split_check_with(&d, &dm1, &d0, a)
}

pub fn split_check_with<C: Coeff>(d: &Operator<C>, dm1: &Operator<C>, d0: &Operator<C>, a: &Element<C>) -> Result<SplitReport<C>> {
    let n = a.n();
    let mut minus1 = Element::zero(n);
    let mut zero = Element::zero(n);
    for k in a.degrees(Grading::UCount) {
        let part = a.homogeneous_component(Grading::UCount, k);
        let full = d.apply(&part)?;
        minus1.add_assign(&full.homogeneous_component(Grading::UCount, k - 1).sub(&dm1.apply(&part)?));
        zero.add_assign(&full.homogeneous_component(Grading::UCount, k).sub(&d0.apply(&part)?));
    }
    Ok(SplitReport { minus1, zero })
}

/// `deg_theta1 = -1` component of `Delta_0(a)` minus the closed formula.
pub fn split_check_theta1<C: Coeff>(p: &Pencil<C>, a: &Element<C>) -> Result<Element<C>> {
    let d0 = Operator::new(p, OperatorId::Delta0)?;
    let dm = Operator::new(p, OperatorId::Delta0Minus1)?;
    split_theta1_with(&d0, &dm, a)
}

pub fn split_theta1_with<C: Coeff>(d0: &Operator<C>, dm: &Operator<C>, a: &Element<C>) -> Result<Element<C>> {
    let mut out = Element::zero(a.n());
    for k in a.degrees(Grading::Theta1) {
        let part = a.homogeneous_component(Grading::Theta1, k);
        out.add_assign(&d0.apply(&part)?.homogeneous_component(Grading::Theta1, k - 1));
    }
    Ok(out.sub(&dm.apply(a)?))
}

/// The two correction terms separating `Psi^{-1} Delta_{0,1} Psi` from the tilde
/// operator, with diagonal rotation coefficient `gamma_ii = H_i^{-1} d_i H_i`.
pub fn conjugation_extra_terms<C: Coeff>(p: &Pencil<C>, a: &Element<C>) -> Result<Element<C>> {
    let n = p.n();
    let g = |i: usize, j: usize| -> Result<C> {
        if i == j {
            Ok(p.l(i, i).scale(&rat(-1, 2)))
        } else {
            p.gamma(i, j)
        }
    };
    let ratio = |i: usize, j: usize, e: usize| -> Result<C> {
        let r = p.h(i)?.mul(p.h_inv(j)?);
        let mut acc = C::one();
        for _ in 0..e {
            acc = acc.mul(&r);
        }
        Ok(acc)
    };
    let mut comps: HashMap<Gen, Element<C>> = HashMap::new();
    let mut top = 0;
    for (m, _) in a.terms() {
        top = top.max(m.ujets().iter().map(|x| x.0 .1).max().unwrap_or(0));
        top = top.max(m.thetas().iter().map(|x| x.1).max().unwrap_or(0));
    }
    for i in 0..n {
        for j in 0..n {
            for s in 1..=top {
                // -(u^i - lambda) (f^i/f^j)^{(s+1)/2} ((s+2) g_ji th_i^1 + s g_ij th_j^1) u^{j,s} d/du^{i,s}
                let k = C::u_minus_lambda(i).mul(&ratio(i, j, s + 1)?).neg();
                let x = th(n, i, 1)
                    .mul_coeff(&g(j, i)?.scale(&int(s as i64 + 2)))
                    .add(&th(n, j, 1).mul_coeff(&g(i, j)?.scale(&int(s as i64))))
                    .mul(&uj(n, j, s))
                    .mul_coeff(&k);
                comps.entry(Gen::U(i, s)).or_insert_with(|| Element::zero(n)).add_assign(&x);
                if s >= 2 {
                    // (u^j - lambda) (f^i/f^j)^{s/2} ((1-s) g_ij th_j^1 - (1+s) g_ji th_i^1) th_j^s d/dth_i^s
                    let k = C::u_minus_lambda(j).mul(&ratio(i, j, s)?);
                    let y = th(n, j, 1)
                        .mul_coeff(&g(i, j)?.scale(&int(1 - s as i64)))
                        .sub(&th(n, i, 1).mul_coeff(&g(j, i)?.scale(&int(1 + s as i64))))
                        .mul(&th(n, j, s))
                        .mul_coeff(&k);
                    comps.entry(Gen::Theta(i, s)).or_insert_with(|| Element::zero(n)).add_assign(&y);
                }
            }
        }
    }
    Ok(a.apply_derivation(&mut |g| comps.get(&g).cloned()))
}

/// Classification of the residual terms of the conjugated `Delta_{0,1}` against its tilde form.
#[derive(Clone, Debug)]
pub struct ConjugationReport<C: Coeff> {
    pub residual: Element<C>,
    /// Terms lying in the mixed subspace.
    pub mixed: Element<C>,
    /// Terms vanishing after `lambda -> u^i`.
    pub lambda_multiple: Element<C>,
    pub unexplained: Element<C>,
}

impl<C: Coeff> ConjugationReport<C> {
    pub fn passed(&self) -> bool {
        self.unexplained.is_zero()
    }
}

/// `Psi^{-1} Delta_{0,1} Psi (a) - Delta01_tilde(a)`, classified term by term
/// for `a` in `dhat_i(C_i)`. A term of a single-index monomial of index `k`
/// counts as trivial when its coefficient vanishes at `lambda = u^k`.
pub fn conjugation_residual<C: Coeff>(p: &Pencil<C>, a: &Element<C>) -> Result<ConjugationReport<C>> {
    let n = p.n();
    let d01 = Operator::new(p, OperatorId::Delta01)?;
    let tilde = Operator::new(p, OperatorId::Delta01Tilde)?;
    let conj = p.psi(&d01.apply(&p.psi(a, false)?)?, true)?;
    let residual = conj.sub(&tilde.apply(a)?);
    let mut mixed = Element::zero(n);
    let mut lambda_multiple = Element::zero(n);
    let mut unexplained = Element::zero(n);
    for (m, c) in residual.terms() {
        let t = Element::monomial(n, m.clone(), c.clone());
        match subspace_classify(m) {
            SubspaceClass::MHat => mixed.add_assign(&t),
            SubspaceClass::CiNt(k) if c.set_lambda(k).is_zero() => lambda_multiple.add_assign(&t),
            _ => unexplained.add_assign(&t),
        }
    }
    Ok(ConjugationReport { residual, mixed, lambda_multiple, unexplained })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffFn;
    use crate::pencil::PencilData;

    type E = Element<CoeffFn>;

    fn flat(n: usize) -> Pencil<CoeffFn> {
        Pencil::concrete(&PencilData::flat(n)).unwrap()
    }

    #[test]
    fn delta_minus1_example() {
        let p = flat(1);
        let r = apply(&p, OperatorId::DeltaMinus1, &E::u(1, 0, 1)).unwrap();
        assert_eq!(r, E::theta(1, 0, 2).mul_coeff(&CoeffFn::u_minus_lambda(0)));
    }

    #[test]
    fn d_g_on_function() {
        // D(g = 1) c(u) = c'(u) theta^1
        let p = flat(1);
        let c = CoeffFn::u(0).mul(&CoeffFn::u(0));
        let d = Operator::d_g(&p, &[CoeffFn::one()]).unwrap();
        let r = d.apply(&E::from_coeff(1, c)).unwrap();
        assert_eq!(r, E::theta(1, 0, 1).mul_coeff(&CoeffFn::u(0).scale(&int(2))));
    }

    #[test]
    fn dhat_kills_constant_part() {
        let p = flat(2);
        let a = E::theta(2, 0, 0).mul_coeff(&CoeffFn::u(1));
        assert!(apply(&p, OperatorId::Dhat(0), &a).unwrap().is_zero());
    }

    #[test]
    fn euler_example() {
        let p = flat(1);
        let a = E::u(1, 0, 1).mul(&E::theta(1, 0, 0));
        assert_eq!(apply(&p, OperatorId::Euler(0), &a).unwrap(), a);
    }

    #[test]
    fn theta1_split_example() {
        let p = flat(1);
        let a = E::theta(1, 0, 1);
        let dm = apply(&p, OperatorId::Delta0Minus1, &a).unwrap();
        assert_eq!(dm, E::theta(1, 0, 0).mul(&E::theta(1, 0, 2)).scale(&rat(1, 2)));
        assert!(split_check_theta1(&p, &a).unwrap().is_zero());
    }

    #[test]
    fn degu_split_example() {
        let p = flat(1);
        let a = E::u(1, 0, 1).mul(&E::theta(1, 0, 0));
        assert!(split_check_degu(&p, &a).unwrap().passed());
        assert!(split_check_degu(&p, &E::one(1)).unwrap().passed());
    }

    #[test]
    fn names_roundtrip() {
        for id in [
            OperatorId::DLambda,
            OperatorId::Dhat(2),
            OperatorId::DeltaHat(1, 0),
            OperatorId::Di1(0),
            OperatorId::Delta0Up1,
            OperatorId::DeltaBar,
        ] {
            assert_eq!(id.to_string().parse::<OperatorId>().unwrap(), id);
        }
        assert!("nope".parse::<OperatorId>().is_err());
        assert!("dhat(0)".parse::<OperatorId>().is_err());
    }
}
