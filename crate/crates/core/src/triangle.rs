//! Triangle-inequality machinery: deficits for PMF triples, the per-letter
//! term `T(p, q, r)`, the six-case ordering decomposition that powers the
//! two-letter proof, and the pairwise-combination probe.

use serde::{Deserialize, Serialize};

use crate::divergence::{chen_sbert, gap_term, unit_range};
use crate::{Error, KParam, Pmf};

/// One letter's probabilities under the three distributions of a triangle.
///
/// `new` enforces the unit box. The reduction solver synthesizes candidate
/// triples that may leave the box while a root is being located; those are
/// built directly and flagged through its own feasibility check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LetterTriple {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl LetterTriple {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self, Error> {
        unit_range("p", p)?;
        unit_range("q", q)?;
        unit_range("r", r)?;
        Ok(Self { p, q, r })
    }
}

pub(crate) fn letter_term_raw(p: f64, q: f64, r: f64, k: f64) -> f64 {
    (p + q) * gap_term(p, q, k) + (q + r) * gap_term(q, r, k) - (p + r) * gap_term(p, r, k)
}

/// Per-letter term of the expanded triangle sum:
///
/// ```text
/// T(p,q,r) = (p+q)·log2(|p−q|^k+1) + (q+r)·log2(|q−r|^k+1) − (p+r)·log2(|p−r|^k+1)
/// ```
///
/// The plain triangle deficit of a PMF triple equals half the sum of these
/// terms over the letters, so a letter contributes `T/2` to the deficit.
pub fn letter_term(t: LetterTriple, k: KParam) -> f64 {
    letter_term_raw(t.p, t.q, t.r, k.get())
}

/// Parameters of an ordering case: `(a, b)` when `q` lies between `p` and `r`
/// (cases 1 and 6, where the outer gap is `a + b`), `(c, d)` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CaseParams {
    Ab { a: f64, b: f64 },
    Cd { c: f64, d: f64 },
}

/// One of the six orderings of `(p, q, r)` together with its gap parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingCase {
    pub case_id: u8,
    pub params: CaseParams,
}

impl OrderingCase {
    /// Reconstructs the pairwise gaps `(|p−q|, |q−r|, |p−r|)` from the case
    /// parameters alone.
    pub fn gaps(&self) -> (f64, f64, f64) {
        match (self.case_id, self.params) {
            (1 | 6, CaseParams::Ab { a, b }) => (a, b, a + b),
            (2 | 4, CaseParams::Cd { c, d }) => (c + d, d, c),
            (3 | 5, CaseParams::Cd { c, d }) => (d, c + d, c),
            (id, params) => unreachable!("case {id} cannot carry {params:?}"),
        }
    }
}

/// Assigns a triple to its ordering case:
///
/// 1. `p ≥ q ≥ r` with `a = p−q`, `b = q−r`
/// 2. `p ≥ r ≥ q` with `c = p−r`, `d = r−q`
/// 3. `q ≥ p ≥ r` with `c = p−r`, `d = q−p`
/// 4. `q ≥ r ≥ p` with `c = r−p`, `d = q−r`
/// 5. `r ≥ p ≥ q` with `c = r−p`, `d = p−q`
/// 6. `r ≥ q ≥ p` with `a = q−p`, `b = r−q`
///
/// Ties match several cases; the lowest-numbered one wins so the result is
/// deterministic (the term value itself is case-independent).
pub fn classify_ordering(t: LetterTriple) -> OrderingCase {
    let LetterTriple { p, q, r } = t;
    let (case_id, params) = if p >= q && q >= r {
        (1, CaseParams::Ab { a: p - q, b: q - r })
    } else if p >= r && r >= q {
        (2, CaseParams::Cd { c: p - r, d: r - q })
    } else if q >= p && p >= r {
        (3, CaseParams::Cd { c: p - r, d: q - p })
    } else if q >= r && r >= p {
        (4, CaseParams::Cd { c: r - p, d: q - r })
    } else if r >= p && p >= q {
        (5, CaseParams::Cd { c: r - p, d: p - q })
    } else {
        (6, CaseParams::Ab { a: q - p, b: r - q })
    };
    OrderingCase { case_id, params }
}

/// The fraction inside the logarithm of the unweighted two-letter term:
///
/// ```text
/// (|p−q|^k + 1)(|q−r|^k + 1) / (|p−r|^k + 1)
/// ```
///
/// For `0 < k ≤ 1` this is at least 1 on the whole unit cube (the two-letter
/// triangle inequality); for `k > 1` it can drop below 1.
pub fn case_fraction(t: LetterTriple, k: KParam) -> f64 {
    let LetterTriple { p, q, r } = t;
    let k = k.get();
    let pow = |x: f64, y: f64| -> f64 {
        if y == 1.0 {
            x
        } else {
            x.powf(y)
        }
    };
    let num = (pow((p - q).abs(), k) + 1.0) * (pow((q - r).abs(), k) + 1.0);
    let den = pow((p - r).abs(), k) + 1.0;
    num / den
}

/// The two sides of the comparison that closes cases 1 and 6 for `k ≤ 1`:
/// `X = a^k·b^k + a^k + b^k` and `Y = (a+b)^k`. `X ≥ Y` there makes the case
/// fraction at least 1. Computable for any `k > 0`.
pub fn lemma2_xy(a: f64, b: f64, k: KParam) -> Result<(f64, f64), Error> {
    unit_range("a", a)?;
    unit_range("b", b)?;
    let k = k.get();
    let (ak, bk) = (a.powf(k), b.powf(k));
    Ok((ak * bk + ak + bk, (a + b).powf(k)))
}

/// Probe for the two-letter combination step: does merging two letters ever
/// exceed the sum of their separate terms? Returns
/// `(T(ta + tb), T(ta) + T(tb))`; `lhs > rhs` witnesses a failure of that
/// would-be induction step.
pub fn pair_combine_gap(ta: LetterTriple, tb: LetterTriple, k: KParam) -> Result<(f64, f64), Error> {
    let sums = [
        ('p', ta.p + tb.p),
        ('q', ta.q + tb.q),
        ('r', ta.r + tb.r),
    ];
    for (component, sum) in sums {
        if !(-crate::pmf::DEFAULT_SUM_TOLERANCE..=1.0 + crate::pmf::DEFAULT_SUM_TOLERANCE)
            .contains(&sum)
        {
            return Err(Error::SumOutOfRange { component, sum });
        }
    }
    let combined = LetterTriple {
        p: ta.p + tb.p,
        q: ta.q + tb.q,
        r: ta.r + tb.r,
    };
    Ok((
        letter_term(combined, k),
        letter_term(ta, k) + letter_term(tb, k),
    ))
}

/// Which deficit is being tested: the plain sum of divergences, or the sum of
/// their k-th roots (the conjectured metric form for `k > 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeficitVariant {
    Plain,
    KthRoot,
}

impl std::fmt::Display for DeficitVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str(match self {
            DeficitVariant::Plain => "plain",
            DeficitVariant::KthRoot => "kth-root",
        })
    }
}

pub(crate) fn variant_deficit(d_pq: f64, d_qr: f64, d_pr: f64, k: f64, variant: DeficitVariant) -> f64 {
    match variant {
        DeficitVariant::Plain => d_pq + d_qr - d_pr,
        DeficitVariant::KthRoot => {
            let inv = 1.0 / k;
            // max(0) keeps the root real if a divergence rounds to −0.0-ish.
            let root = |d: f64| d.max(0.0).powf(inv);
            root(d_pq) + root(d_qr) - root(d_pr)
        }
    }
}

/// The three pairwise divergences of a triangle and its deficit. A negative
/// deficit certifies a triangle-inequality violation for the chosen variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleReport {
    pub d_pq: f64,
    pub d_qr: f64,
    pub d_pr: f64,
    pub deficit: f64,
    pub k: KParam,
    pub variant: DeficitVariant,
}

/// Deficit of the `P–Q–R` orientation: `d(P,Q) + d(Q,R) − d(P,R)`, with each
/// divergence replaced by its k-th root under [`DeficitVariant::KthRoot`].
pub fn triangle_deficit(
    p: &Pmf,
    q: &Pmf,
    r: &Pmf,
    k: KParam,
    variant: DeficitVariant,
) -> Result<TriangleReport, Error> {
    let d_pq = chen_sbert(p, q, k)?;
    let d_qr = chen_sbert(q, r, k)?;
    let d_pr = chen_sbert(p, r, k)?;
    Ok(TriangleReport {
        d_pq,
        d_qr,
        d_pr,
        deficit: variant_deficit(d_pq, d_qr, d_pr, k.get(), variant),
        k,
        variant,
    })
}
