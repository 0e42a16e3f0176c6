use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

pub type Letter = usize;
pub type Word = Vec<Letter>;

/// Upper bound on the number of words any enumeration may produce.
pub const DEFAULT_CYLINDER_CAP: usize = 1 << 22;

type PairPredicate = Arc<dyn Fn(Letter, Letter) -> bool + Send + Sync>;

#[derive(Clone)]
enum Rule {
    Full,
    Forbidden(HashSet<(Letter, Letter)>),
    Matrix(Vec<Vec<bool>>),
    Predicate(PairPredicate),
}

/// A 0/1 incidence matrix over the (possibly countable) alphabet, given as a
/// rule on letter pairs.
#[derive(Clone)]
pub struct IncidenceMatrix {
    rule: Rule,
    witness: Option<Vec<Word>>,
}

impl fmt::Debug for IncidenceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rule = match &self.rule {
            Rule::Full => "full".to_string(),
            Rule::Forbidden(p) => format!("forbidden {:?}", p),
            Rule::Matrix(m) => format!("matrix {}x{}", m.len(), m.len()),
            Rule::Predicate(_) => "predicate".to_string(),
        };
        f.debug_struct("IncidenceMatrix").field("rule", &rule).finish()
    }
}

impl IncidenceMatrix {
    pub fn full() -> Self {
        Self { rule: Rule::Full, witness: Some(vec![Vec::new()]) }
    }

    /// Two letters, `11` forbidden.
    pub fn golden_mean() -> Self {
        Self::forbidding([(1, 1)])
    }

    pub fn forbidding<I: IntoIterator<Item = (Letter, Letter)>>(pairs: I) -> Self {
        Self { rule: Rule::Forbidden(pairs.into_iter().collect()), witness: None }
    }

    /// Explicit square matrix; letters outside it are never allowed.
    pub fn from_matrix(rows: Vec<Vec<bool>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("incidence matrix must be square".into()));
        }
        Ok(Self { rule: Rule::Matrix(rows), witness: None })
    }

    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(Letter, Letter) -> bool + Send + Sync + 'static,
    {
        Self { rule: Rule::Predicate(Arc::new(f)), witness: None }
    }

    /// Attach a user supplied connecting-word set `F`.
    pub fn with_witness(mut self, words: Vec<Word>) -> Self {
        self.witness = Some(words);
        self
    }

    pub fn witness(&self) -> Option<&[Word]> {
        self.witness.as_deref()
    }

    pub fn is_full(&self) -> bool {
        matches!(self.rule, Rule::Full)
    }

    pub fn allows(&self, a: Letter, b: Letter) -> bool {
        match &self.rule {
            Rule::Full => true,
            Rule::Forbidden(p) => !p.contains(&(a, b)),
            Rule::Matrix(m) => a < m.len() && b < m.len() && m[a][b],
            Rule::Predicate(f) => f(a, b),
        }
    }

    /// Number of letters the rule itself restricts to, if any.
    fn letter_bound(&self) -> Option<usize> {
        match &self.rule {
            Rule::Matrix(m) => Some(m.len()),
            _ => None,
        }
    }
}

/// A one-sided shift space `E_A^+` with alphabet `{0, 1, ...}`; `letters`
/// is `None` for a countably infinite alphabet.
#[derive(Clone, Debug)]
pub struct ShiftSpace {
    letters: Option<usize>,
    incidence: IncidenceMatrix,
}

impl ShiftSpace {
    pub fn new(letters: Option<usize>, incidence: IncidenceMatrix) -> Self {
        let letters = match (letters, incidence.letter_bound()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Self { letters, incidence }
    }

    pub fn full(k: usize) -> Self {
        Self::new(Some(k), IncidenceMatrix::full())
    }

    pub fn golden_mean() -> Self {
        Self::new(Some(2), IncidenceMatrix::golden_mean())
    }

    pub fn countable_full() -> Self {
        Self::new(None, IncidenceMatrix::full())
    }

    pub fn letters(&self) -> Option<usize> {
        self.letters
    }

    pub fn incidence(&self) -> &IncidenceMatrix {
        &self.incidence
    }

    /// Number of letters kept by truncation parameter `n`.
    pub fn truncation(&self, n: usize) -> usize {
        self.letters.map_or(n, |k| k.min(n))
    }

    pub fn is_finite(&self) -> bool {
        self.letters.is_some()
    }

    pub fn allows(&self, a: Letter, b: Letter) -> bool {
        self.contains(a) && self.contains(b) && self.incidence.allows(a, b)
    }

    fn contains(&self, a: Letter) -> bool {
        self.letters.is_none_or(|k| a < k)
    }

    /// True iff every consecutive pair of the word is allowed. The empty
    /// word is rejected.
    pub fn is_admissible(&self, word: &[Letter]) -> bool {
        if word.is_empty() || !word.iter().all(|&a| self.contains(a)) {
            return false;
        }
        word.windows(2).all(|p| self.incidence.allows(p[0], p[1]))
    }

    /// All admissible words of length `n` over the first `truncation`
    /// letters, in lexicographic order.
    pub fn enumerate_cylinders(&self, n: usize, truncation: usize, cap: usize) -> Result<Vec<Word>> {
        if n == 0 || truncation == 0 {
            return Err(Error::InvalidParameter("cylinder length and truncation must be >= 1".into()));
        }
        let k = self.truncation(truncation);
        let mut out = Vec::new();
        let mut word = Vec::with_capacity(n);
        self.enumerate_rec(n, k, cap, &mut word, &mut out)?;
        Ok(out)
    }

    fn enumerate_rec(&self, n: usize, k: usize, cap: usize, word: &mut Word, out: &mut Vec<Word>) -> Result<()> {
        if word.len() == n {
            if out.len() >= cap {
                return Err(Error::CylinderCap { count: out.len() + 1, cap });
            }
            out.push(word.clone());
            return Ok(());
        }
        for e in 0..k {
            if let Some(&last) = word.last() {
                if !self.incidence.allows(last, e) {
                    continue;
                }
            }
            word.push(e);
            self.enumerate_rec(n, k, cap, word, out)?;
            word.pop();
        }
        Ok(())
    }

    /// Connecting words `γ` with `aγb` admissible, discovered by breadth-first
    /// search over the truncated letter graph up to `max_len` letters. Returns
    /// `None` when some pair cannot be connected, i.e. the truncation is not
    /// finitely irreducible.
    pub fn irreducibility_witness(&self, truncation: usize, max_len: usize) -> Option<Vec<Word>> {
        if self.incidence.is_full() {
            return Some(vec![Vec::new()]);
        }
        let k = self.truncation(truncation);
        let mut found: Vec<Word> = Vec::new();
        for a in 0..k {
            // parent pointers of a BFS from `a`
            let mut parent: Vec<Option<Letter>> = vec![None; k];
            let mut depth = vec![usize::MAX; k];
            let mut queue = VecDeque::new();
            for b in 0..k {
                if self.incidence.allows(a, b) {
                    depth[b] = 0;
                    queue.push_back(b);
                }
            }
            while let Some(u) = queue.pop_front() {
                if depth[u] >= max_len {
                    continue;
                }
                for v in 0..k {
                    if depth[v] == usize::MAX && self.incidence.allows(u, v) {
                        depth[v] = depth[u] + 1;
                        parent[v] = Some(u);
                        queue.push_back(v);
                    }
                }
            }
            for b in 0..k {
                if depth[b] == usize::MAX {
                    return None;
                }
                let mut gamma = Vec::new();
                let mut cur = parent[b];
                while let Some(u) = cur {
                    gamma.push(u);
                    cur = parent[u];
                }
                gamma.reverse();
                if !found.contains(&gamma) {
                    found.push(gamma);
                }
            }
        }
        Some(found)
    }

    /// Extend `word` to `target_len` letters inside the truncation: repeat the
    /// last letter when allowed, else repeat the word periodically, else
    /// append the smallest allowed letter. This is the point at which
    /// cylinder functions are evaluated.
    pub fn extend_word(&self, word: &[Letter], target_len: usize, truncation: usize) -> Option<Word> {
        if word.is_empty() {
            return None;
        }
        let mut out = word.to_vec();
        if out.len() >= target_len {
            return Some(out);
        }
        let last = *word.last().unwrap();
        if self.allows(last, last) {
            out.resize(target_len, last);
            return Some(out);
        }
        if self.allows(last, word[0]) {
            let mut i = 0;
            while out.len() < target_len {
                out.push(word[i % word.len()]);
                i += 1;
            }
            return Some(out);
        }
        let k = self.truncation(truncation);
        while out.len() < target_len {
            let prev = *out.last().unwrap();
            let next = (0..k).find(|&e| self.allows(prev, e))?;
            out.push(next);
        }
        Some(out)
    }
}
