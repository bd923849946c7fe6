use std::collections::BTreeMap;
use std::fmt;

use super::BehaviorLine;
use crate::exactnum::{ExactMatrix, Matrix, QuadExt};
use crate::sdp::{MatrixPencil, SdpProblem};

/// Name of the line parameter in the generated problems.
pub const MU: &str = "mu";

/// A word in the projectors `Aₓ`, `B_y`, with Alice's letters (settings)
/// written before Bob's. Reduced words have no repeated adjacent letter
/// (`Aₓ² = Aₓ`); the two parties commute.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MomentLabel {
    pub alice: Vec<u8>,
    pub bob: Vec<u8>,
}

fn reduce(word: Vec<u8>) -> Vec<u8> {
    let mut out: Vec<u8> = Vec::with_capacity(word.len());
    for c in word {
        if out.last() != Some(&c) {
            out.push(c);
        }
    }
    out
}

impl MomentLabel {
    pub fn new(alice: &[u8], bob: &[u8]) -> Self {
        MomentLabel {
            alice: reduce(alice.to_vec()),
            bob: reduce(bob.to_vec()),
        }
    }

    pub fn identity() -> Self {
        MomentLabel::new(&[], &[])
    }

    /// Reduced word of `u†·v`.
    pub fn product(u: &MomentLabel, v: &MomentLabel) -> Self {
        let join = |a: &[u8], b: &[u8]| {
            let mut w: Vec<u8> = a.iter().rev().copied().collect();
            w.extend_from_slice(b);
            reduce(w)
        };
        MomentLabel {
            alice: join(&u.alice, &v.alice),
            bob: join(&u.bob, &v.bob),
        }
    }

    pub fn dagger(&self) -> Self {
        MomentLabel {
            alice: self.alice.iter().rev().copied().collect(),
            bob: self.bob.iter().rev().copied().collect(),
        }
    }

    /// Representative of `{w, w†}`: real moment matrices have equal entries
    /// at both.
    pub fn canonical(&self) -> Self {
        let d = self.dagger();
        if d < *self {
            d
        } else {
            self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.alice.len() + self.bob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position in the Collins-Gisin table for words of at most one letter
    /// per party.
    pub fn cg_index(&self) -> Option<(usize, usize)> {
        if self.alice.len() > 1 || self.bob.len() > 1 {
            return None;
        }
        let row = self.alice.first().map_or(0, |x| 1 + *x as usize);
        let col = self.bob.first().map_or(0, |y| 1 + *y as usize);
        Some((row, col))
    }

    /// Variable name: `pA0`, `pB1`, `p01` for probabilities, `a01`, `b01`
    /// for single-party moments, `c01_10` for mixed ones.
    pub fn var_name(&self) -> String {
        let digits = |w: &[u8]| w.iter().map(|c| c.to_string()).collect::<String>();
        match (self.cg_index(), self.alice.is_empty(), self.bob.is_empty()) {
            (Some(_), true, true) => "1".into(),
            (Some(_), false, true) => format!("pA{}", digits(&self.alice)),
            (Some(_), true, false) => format!("pB{}", digits(&self.bob)),
            (Some(_), false, false) => format!("p{}{}", digits(&self.alice), digits(&self.bob)),
            (None, false, true) => format!("a{}", digits(&self.alice)),
            (None, true, false) => format!("b{}", digits(&self.bob)),
            (None, _, _) => format!("c{}_{}", digits(&self.alice), digits(&self.bob)),
        }
    }

    /// Ordering of free moments in generated problems: single-party words
    /// first, then by length, Alice before Bob, then lexicographic.
    fn order_key(&self) -> impl Ord {
        let parties = usize::from(!self.alice.is_empty()) + usize::from(!self.bob.is_empty());
        (
            parties,
            self.len(),
            self.alice.is_empty(),
            self.alice.len(),
            self.alice.clone(),
            self.bob.clone(),
        )
    }
}

impl fmt::Display for MomentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        for c in &self.alice {
            write!(f, "A{c}")?;
        }
        for c in &self.bob {
            write!(f, "B{c}")?;
        }
        Ok(())
    }
}

/// `(1, A₀, A₁, B₀, B₁, A₀B₀, A₀B₁, A₁B₀, A₁B₁)`.
pub const AQ_BASIS: [(&[u8], &[u8]); 9] = [
    (&[], &[]),
    (&[0], &[]),
    (&[1], &[]),
    (&[], &[0]),
    (&[], &[1]),
    (&[0], &[0]),
    (&[0], &[1]),
    (&[1], &[0]),
    (&[1], &[1]),
];

/// `(1, A₀, A₁, B₀, B₁)`.
pub const LEVEL1_BASIS: [(&[u8], &[u8]); 5] = [
    (&[], &[]),
    (&[0], &[]),
    (&[1], &[]),
    (&[], &[0]),
    (&[], &[1]),
];

/// Canonical labels of every entry of the moment matrix over `basis`.
pub fn moment_matrix_labels(basis: &[(&[u8], &[u8])]) -> Vec<Vec<MomentLabel>> {
    let ops: Vec<MomentLabel> = basis.iter().map(|(a, b)| MomentLabel::new(a, b)).collect();
    ops.iter()
        .map(|u| ops.iter().map(|v| MomentLabel::product(u, v).canonical()).collect())
        .collect()
}

/// Builds the pencil of a moment matrix. `known` gives `(constant, μ
/// coefficient)` for words with a fixed value; every other canonical word
/// becomes a free variable. With `with_mu`, `μ` is the first variable.
fn moment_pencil(
    basis: &[(&[u8], &[u8])],
    with_mu: bool,
    known: impl Fn(&MomentLabel) -> Option<(QuadExt, QuadExt)>,
) -> MatrixPencil<QuadExt> {
    let labels = moment_matrix_labels(basis);
    let n = basis.len();
    let mut constant: ExactMatrix = Matrix::zeros(n, n);
    let mut mu_term: ExactMatrix = Matrix::zeros(n, n);
    let mut free: BTreeMap<MomentLabel, ExactMatrix> = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            let w = &labels[i][j];
            match known(w) {
                Some((c, m)) => {
                    constant.set_sym(i, j, c);
                    mu_term.set_sym(i, j, m);
                }
                None => free
                    .entry(w.clone())
                    .or_insert_with(|| Matrix::zeros(n, n))
                    .set_sym(i, j, QuadExt::one()),
            }
        }
    }
    let mut pencil = MatrixPencil::new(constant);
    if with_mu {
        pencil.push(MU, mu_term);
    }
    let mut free: Vec<_> = free.into_iter().collect();
    free.sort_by_key(|(w, _)| w.order_key());
    for (w, m) in free {
        pencil.push(w.var_name(), m);
    }
    pencil
}

/// Maximize `μ` subject to `l(μ)` admitting a positive semidefinite 9×9
/// moment matrix over [`AQ_BASIS`].
pub fn almost_quantum_pencil(line: &BehaviorLine) -> SdpProblem<QuadExt> {
    let pencil = moment_pencil(&AQ_BASIS, true, |w| {
        w.cg_index().map(|(i, j)| line.affine_entry(i, j))
    });
    let mut objective = vec![QuadExt::zero(); pencil.terms.len()];
    objective[0] = QuadExt::one();
    SdpProblem::dual_form(format!("almost-quantum-{}", line.name), pencil, objective)
        .with_note(format!("maximize mu such that {}(mu) has an almost-quantum moment matrix", line.name))
}

/// Level-1 moment matrix with `p_B(0) = p_B(1) = 0`, maximizing
/// `−p_A(0) + p(0,0) + p(0,1) + p(1,0) − p(1,1)`.
pub fn chsh_toy_pencil() -> SdpProblem<QuadExt> {
    let pencil = moment_pencil(&LEVEL1_BASIS, false, |w| {
        if w.is_empty() {
            Some((QuadExt::one(), QuadExt::zero()))
        } else if w.alice.is_empty() && w.bob.len() == 1 {
            Some((QuadExt::zero(), QuadExt::zero()))
        } else {
            None
        }
    });
    let coef = |name: &str| match name {
        "pA0" | "p11" => -1,
        "p00" | "p01" | "p10" => 1,
        _ => 0,
    };
    let objective = pencil
        .terms
        .iter()
        .map(|t| QuadExt::from(coef(&t.name)))
        .collect();
    SdpProblem::dual_form("chsh-toy", pencil, objective)
        .with_note("level-1 CHSH maximization with p_B(0) = p_B(1) = 0")
}
