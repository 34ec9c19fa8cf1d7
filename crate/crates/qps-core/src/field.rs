//! Arithmetic in the Galois field GF(d^n), d prime.
//!
//! Elements are represented by their coefficient vectors over the
//! *polynomial basis* `{1, x, …, x^{n−1}}`, where `x` is the class of the
//! indeterminate modulo a monic irreducible polynomial of degree `n` over
//! `Z_d`. The canonical integer index of an element is the little-endian
//! coefficient integer `Σ_k c_k d^k`; multiplication runs through
//! discrete-log tables with respect to a primitive element `σ`.
//!
//! The field trace `tr(λ) = λ + λ^d + … + λ^{d^{n−1}}` takes values in the
//! prime subfield `Z_d` and defines the additive character
//! `χ(λ) = exp(2πi·tr(λ)/d)`, the plane-wave analog used throughout the
//! operator and phase-space modules. Dual bases (`tr(θ̄_i θ_j) = δ_ij`)
//! and selfdual bases (`tr(θ_i θ_j) = δ_ij`) are the bridge between field
//! labels and per-qudit coordinates: over a selfdual basis the character
//! of a product factorizes, which is what makes displacement operators and
//! quasidistributions of product states factor into single-qudit pieces.
//!
//! Standard references: Lidl & Niederreiter, *Finite Fields* (Cambridge,
//! 1997), ch. 2–3; Gibbons, Hoffman & Wootters, Phys. Rev. A 70, 062101
//! (2004), App. A; Vourdas, Rep. Prog. Phys. 67, 267 (2004), §5.

use std::cell::OnceCell;
use std::fmt;

use num_complex::Complex64;

use crate::{QpsError, Result};

/// Default cap on the field size d^n.
///
/// Dense `d^n × d^n` operators above this size are impractical on commodity
/// hardware; the cap can be overridden via [`make_field_capped`].
pub const DEFAULT_SIZE_CAP: u64 = 4096;

/// An element of GF(d^n), tagged with a fingerprint of its field context.
///
/// The element stores its canonical index (the little-endian coefficient
/// integer over the polynomial basis). All arithmetic goes through the
/// owning [`FieldContext`]; combining elements from different contexts
/// yields [`QpsError::ContextMismatch`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    pub(crate) idx: u64,
    pub(crate) tag: u64,
}

impl FieldElement {
    /// Canonical index: the little-endian coefficient integer `Σ c_k d^k`.
    pub fn index(&self) -> u64 {
        self.idx
    }

    /// True for the additive identity.
    pub fn is_zero(&self) -> bool {
        self.idx == 0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement({})", self.idx)
    }
}

/// The role a basis plays; affects only bookkeeping and reporting.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BasisKind {
    /// `{1, x, …, x^{n−1}}`.
    Polynomial,
    /// `{θ, θ^d, …, θ^{d^{n−1}}}` for some θ.
    Normal,
    /// `tr(θ_i θ_j) = δ_ij`.
    Selfdual,
    /// Diagonal Gram matrix `diag(1,…,1,c)` with `c ≠ 0, 1`; used where a
    /// strictly selfdual basis does not exist (odd `d`, even `n`).
    AlmostSelfdual,
    /// Anything else supplied by the caller.
    Custom,
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BasisKind::Polynomial => "polynomial",
            BasisKind::Normal => "normal",
            BasisKind::Selfdual => "selfdual",
            BasisKind::AlmostSelfdual => "almost-selfdual",
            BasisKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// An ordered basis of GF(d^n) over Z_d.
#[derive(Clone, Debug)]
pub struct Basis {
    pub kind: BasisKind,
    pub elements: Vec<FieldElement>,
}

/// Outcome of the selfdual-basis search.
#[derive(Clone, Debug)]
pub struct SelfdualSearch {
    /// The basis found; `kind` is [`BasisKind::Selfdual`] when a strictly
    /// selfdual basis exists and [`BasisKind::AlmostSelfdual`] otherwise.
    pub basis: Basis,
    /// Diagonal of the Gram matrix `tr(θ_i θ_j)` (off-diagonal is zero).
    pub gram_diag: Vec<u64>,
}

/// Immutable context for one realization of GF(d^n).
///
/// Built by [`make_field`]; owns the modulus polynomial, the discrete-log
/// tables of the primitive element σ, and the trace/character tables.
pub struct FieldContext {
    d: u64,
    n: usize,
    q: u64,
    /// Monic modulus, little-endian coefficients, length n+1.
    poly: Vec<u64>,
    poly_text: String,
    /// exp[k] = index of σ^k, for k in 0..q−1.
    exp: Vec<u64>,
    /// log[idx] = discrete log of the element with that index (undefined at 0).
    log: Vec<u64>,
    /// trace[idx] ∈ Z_d.
    trace_tab: Vec<u64>,
    /// The d-th roots of unity e^{2πik/d}.
    roots: Vec<Complex64>,
    sigma_idx: u64,
    tag: u64,
    warnings: Vec<String>,
    selfdual: OnceCell<Result<SelfdualSearch>>,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldContext(GF({}^{}), modulus {})", self.d, self.n, self.poly_text)
    }
}

/// Build GF(d^n) with the default size cap.
///
/// `poly` is an optional monic modulus such as `"x^3+2x^2+1"`; when omitted
/// the canonical modulus is chosen: for `n = 1` the polynomial `x − g` with
/// `g` the smallest primitive root mod `d`, and for `n > 1` the first monic
/// polynomial, in lexicographic order on the coefficient tuple
/// `(a_{n−1}, …, a_1, a_0)`, that is irreducible with `x` primitive.
///
/// A user-supplied modulus that is irreducible but whose root `x` is not
/// primitive is accepted: a warning is recorded on the context and σ is
/// found by search instead.
pub fn make_field(d: u64, n: usize, poly: Option<&str>) -> Result<FieldContext> {
    make_field_capped(d, n, poly, DEFAULT_SIZE_CAP)
}

/// [`make_field`] with an explicit size cap on d^n.
pub fn make_field_capped(d: u64, n: usize, poly: Option<&str>, cap: u64) -> Result<FieldContext> {
    if !is_prime(d) {
        return Err(QpsError::NotPrime(d));
    }
    if n == 0 {
        return Err(QpsError::InvalidPolynomial("extension degree n must be ≥ 1".into()));
    }
    let q = checked_pow(d, n).filter(|&q| q <= cap).ok_or(QpsError::SizeCapExceeded {
        d,
        n,
        cap,
    })?;

    let mut warnings = Vec::new();
    let poly_coeffs = match poly {
        Some(text) => {
            let p = parse_poly(text, d)?;
            if p.len() != n + 1 || *p.last().unwrap() != 1 {
                return Err(QpsError::InvalidPolynomial(format!(
                    "modulus must be monic of degree {n}, got {text}"
                )));
            }
            if !is_irreducible(&p, d) {
                return Err(QpsError::Reducible(format_poly(&p), d));
            }
            p
        }
        None => default_poly(d, n),
    };

    // Locate a primitive element. The class of x is preferred; otherwise a
    // warning is recorded and the smallest-index generator is used.
    let x_coeffs = if n == 1 {
        // x reduces to the root −a₀ of the linear modulus.
        vec![(d - poly_coeffs[0] % d) % d]
    } else {
        let mut c = vec![0; n];
        c[1] = 1;
        c
    };
    let (sigma_coeffs, x_primitive) = if element_order(&x_coeffs, &poly_coeffs, d, q) == q - 1 {
        (x_coeffs, true)
    } else {
        let sigma = smallest_generator(&poly_coeffs, d, n, q).ok_or_else(|| {
            QpsError::InvalidPolynomial("no primitive element found (not a field?)".into())
        })?;
        (sigma, false)
    };
    if !x_primitive {
        warnings.push(format!(
            "root of {} is not primitive; using σ with index {} found by search",
            format_poly(&poly_coeffs),
            coeffs_to_idx(&sigma_coeffs, d)
        ));
    }

    // Discrete-log tables from σ.
    let mut exp = vec![0u64; (q - 1) as usize];
    let mut log = vec![u64::MAX; q as usize];
    let mut cur = vec![0u64; n];
    cur[0] = 1;
    for (k, slot) in exp.iter_mut().enumerate() {
        let idx = coeffs_to_idx(&cur, d);
        *slot = idx;
        debug_assert_eq!(log[idx as usize], u64::MAX, "σ is not primitive");
        log[idx as usize] = k as u64;
        cur = poly_mul_mod(&cur, &sigma_coeffs, &poly_coeffs, d);
    }
    debug_assert_eq!(coeffs_to_idx(&cur, d), 1, "σ^{{q−1}} ≠ 1");

    // Trace table: tr(λ) = Σ λ^{d^k}; the sum lands in the prime subfield.
    let mut trace_tab = vec![0u64; q as usize];
    for idx in 1..q {
        let a = log[idx as usize];
        let mut acc = vec![0u64; n];
        let mut e: u64 = 1; // d^k mod (q−1)
        for _ in 0..n {
            let p = exp[((a as u128 * e as u128) % (q as u128 - 1)) as usize];
            let pc = idx_to_coeffs(p, d, n);
            for (j, c) in pc.iter().enumerate() {
                acc[j] = (acc[j] + c) % d;
            }
            e = ((e as u128 * d as u128) % (q as u128 - 1)) as u64;
        }
        let t = coeffs_to_idx(&acc, d);
        debug_assert!(t < d, "trace left the prime subfield");
        trace_tab[idx as usize] = t;
    }

    let roots = (0..d)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64) / (d as f64);
            Complex64::new(th.cos(), th.sin())
        })
        .collect();

    let poly_text = format_poly(&poly_coeffs);
    let tag = context_tag(d, n, &poly_coeffs);
    Ok(FieldContext {
        d,
        n,
        q,
        poly: poly_coeffs,
        poly_text,
        exp,
        log,
        trace_tab,
        roots,
        sigma_idx: coeffs_to_idx(&sigma_coeffs, d),
        tag,
        warnings,
        selfdual: OnceCell::new(),
    })
}

impl FieldContext {
    /// Characteristic d.
    pub fn d(&self) -> u64 {
        self.d
    }

    /// Extension degree n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Field size q = d^n (also the Hilbert-space dimension).
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Hilbert-space dimension as usize.
    pub fn dim(&self) -> usize {
        self.q as usize
    }

    /// Modulus polynomial in display form, e.g. `"x^3+2x^2+1"`.
    pub fn poly_text(&self) -> &str {
        &self.poly_text
    }

    /// Little-endian coefficients of the monic modulus (length n+1).
    pub fn poly_coeffs(&self) -> &[u64] {
        &self.poly
    }

    /// Warnings accumulated during construction (e.g. non-primitive `x`).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// The additive identity.
    pub fn zero(&self) -> FieldElement {
        self.el(0)
    }

    /// The multiplicative identity.
    pub fn one(&self) -> FieldElement {
        self.el(1)
    }

    /// The primitive element σ.
    pub fn sigma(&self) -> FieldElement {
        self.el(self.sigma_idx)
    }

    /// σ^k.
    pub fn sigma_pow(&self, k: u64) -> FieldElement {
        self.el(self.exp[(k % (self.q - 1)) as usize])
    }

    fn el(&self, idx: u64) -> FieldElement {
        debug_assert!(idx < self.q);
        FieldElement { idx, tag: self.tag }
    }

    fn check(&self, e: &FieldElement) -> Result<()> {
        if e.tag != self.tag {
            return Err(QpsError::ContextMismatch);
        }
        Ok(())
    }

    /// Element from its canonical index.
    pub fn element_from_index(&self, idx: u64) -> Result<FieldElement> {
        if idx >= self.q {
            return Err(QpsError::InvalidPolynomial(format!(
                "element index {idx} out of range for GF({}^{})",
                self.d, self.n
            )));
        }
        Ok(self.el(idx))
    }

    /// Element from polynomial-basis coefficients (little-endian); values
    /// are reduced mod d.
    pub fn element_from_coeffs(&self, coeffs: &[u64]) -> Result<FieldElement> {
        if coeffs.len() != self.n {
            return Err(QpsError::LengthMismatch { expected: self.n, got: coeffs.len() });
        }
        let reduced: Vec<u64> = coeffs.iter().map(|c| c % self.d).collect();
        Ok(self.el(coeffs_to_idx(&reduced, self.d)))
    }

    /// Little-endian polynomial-basis coefficients of an element.
    pub fn coeffs(&self, e: &FieldElement) -> Vec<u64> {
        idx_to_coeffs(e.idx, self.d, self.n)
    }

    /// Iterator over all q elements in canonical index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(move |i| self.el(i))
    }

    /// Addition.
    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.el(self.add_idx(a.idx, b.idx)))
    }

    pub(crate) fn add_idx(&self, a: u64, b: u64) -> u64 {
        let (d, n) = (self.d, self.n);
        let mut out = 0u64;
        let mut place = 1u64;
        let (mut x, mut y) = (a, b);
        for _ in 0..n {
            out += ((x % d + y % d) % d) * place;
            x /= d;
            y /= d;
            place *= d;
        }
        out
    }

    /// Additive inverse.
    pub fn neg(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        Ok(self.el(self.neg_idx(a.idx)))
    }

    pub(crate) fn neg_idx(&self, a: u64) -> u64 {
        let (d, n) = (self.d, self.n);
        let mut out = 0u64;
        let mut place = 1u64;
        let mut x = a;
        for _ in 0..n {
            out += ((d - x % d) % d) * place;
            x /= d;
            place *= d;
        }
        out
    }

    /// Subtraction `a − b`.
    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    /// Multiplication through the discrete-log tables.
    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.el(self.mul_idx(a.idx, b.idx)))
    }

    pub(crate) fn mul_idx(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        let m = self.q - 1;
        let k = (self.log[a as usize] + self.log[b as usize]) % m;
        self.exp[k as usize]
    }

    /// Multiplicative inverse; [`QpsError::ZeroInverse`] on zero.
    pub fn invert(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        if a.idx == 0 {
            return Err(QpsError::ZeroInverse);
        }
        let m = self.q - 1;
        let k = (m - self.log[a.idx as usize] % m) % m;
        Ok(self.el(self.exp[k as usize]))
    }

    /// Integer power `a^k` (with `a^0 = 1`, `0^k = 0` for k > 0).
    pub fn pow(&self, a: &FieldElement, k: u64) -> Result<FieldElement> {
        self.check(a)?;
        if k == 0 {
            return Ok(self.one());
        }
        if a.idx == 0 {
            return Ok(self.zero());
        }
        let m = self.q - 1;
        let e = ((self.log[a.idx as usize] as u128 * k as u128) % m as u128) as u64;
        Ok(self.el(self.exp[e as usize]))
    }

    /// Discrete logarithm with respect to σ (None for zero).
    pub fn dlog(&self, a: &FieldElement) -> Option<u64> {
        if a.idx == 0 {
            None
        } else {
            Some(self.log[a.idx as usize])
        }
    }

    /// Field trace `tr(λ) = λ + λ^d + … + λ^{d^{n−1}} ∈ Z_d`.
    pub fn trace(&self, a: &FieldElement) -> Result<u64> {
        self.check(a)?;
        Ok(self.trace_tab[a.idx as usize])
    }

    /// Additive character `χ(λ) = exp(2πi·tr(λ)/d)`.
    pub fn character(&self, a: &FieldElement) -> Result<Complex64> {
        self.check(a)?;
        Ok(self.roots[self.trace_tab[a.idx as usize] as usize])
    }

    pub(crate) fn character_idx(&self, idx: u64) -> Complex64 {
        self.roots[self.trace_tab[idx as usize] as usize]
    }

    /// χ(a·b) — the pairing used by Fourier kernels and grid transforms.
    pub(crate) fn pair_char(&self, a: u64, b: u64) -> Complex64 {
        self.character_idx(self.mul_idx(a, b))
    }

    /// The scalar 2⁻¹ as a field element (odd characteristic only).
    pub(crate) fn half(&self) -> Result<FieldElement> {
        if self.d == 2 {
            return Err(QpsError::EvenDimension(2));
        }
        // (d+1)/2 is the inverse of 2 in Z_d, embedded as a constant.
        Ok(self.el((self.d + 1) / 2))
    }

    /// The polynomial basis `{1, x, …, x^{n−1}}`.
    pub fn polynomial_basis(&self) -> Basis {
        let elements = (0..self.n).map(|k| self.el(checked_pow(self.d, k).unwrap())).collect();
        Basis { kind: BasisKind::Polynomial, elements }
    }

    /// Wrap caller-supplied elements as a basis, verifying linear
    /// independence through the Gram matrix.
    pub fn basis_from_elements(&self, kind: BasisKind, elements: &[FieldElement]) -> Result<Basis> {
        let basis = Basis { kind, elements: elements.to_vec() };
        // dual_basis errors out on dependent sets (singular Gram).
        self.dual_basis(&basis.elements)?;
        Ok(basis)
    }

    /// Dual basis `{θ̄_j}` of `{θ_j}`, satisfying `tr(θ̄_j θ_i) = δ_ij`.
    ///
    /// Solved through the inverse of the Gram matrix `G_ij = tr(θ_i θ_j)`
    /// over Z_d; [`QpsError::SingularGram`] when the set is not a basis.
    pub fn dual_basis(&self, basis: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if basis.len() != self.n {
            return Err(QpsError::LengthMismatch { expected: self.n, got: basis.len() });
        }
        for e in basis {
            self.check(e)?;
        }
        let n = self.n;
        let mut gram = vec![vec![0u64; n]; n];
        for i in 0..n {
            for j in 0..n {
                gram[i][j] = self.trace_tab[self.mul_idx(basis[i].idx, basis[j].idx) as usize];
            }
        }
        let inv = invert_matrix_mod(&gram, self.d).ok_or(QpsError::SingularGram)?;
        let mut dual = Vec::with_capacity(n);
        for row in &inv {
            let mut acc = 0u64;
            for (k, &c) in row.iter().enumerate() {
                acc = self.add_idx(acc, self.mul_idx(c % self.d, basis[k].idx));
            }
            dual.push(self.el(acc));
        }
        Ok(dual)
    }

    /// Search for a selfdual basis; falls back to an almost-selfdual basis
    /// (diagonal Gram `diag(1,…,1,c)`, `c ≠ 0`) when none exists.
    ///
    /// Candidate subsets are enumerated in lexicographic order on their
    /// discrete-log tuples, so the result is canonical for a given field
    /// realization. The search prunes on the Gram conditions as the subset
    /// grows (diagonal first, then orthogonality against chosen elements).
    pub fn find_selfdual_basis(&self) -> Result<SelfdualSearch> {
        self.selfdual
            .get_or_init(|| self.selfdual_search_uncached())
            .as_ref()
            .map(|s| s.clone())
            .map_err(clone_err)
    }

    fn selfdual_search_uncached(&self) -> Result<SelfdualSearch> {
        if let Some(found) = self.search_diag_basis(true) {
            let gram_diag = vec![1; self.n];
            return Ok(SelfdualSearch {
                basis: Basis { kind: BasisKind::Selfdual, elements: found },
                gram_diag,
            });
        }
        if let Some(found) = self.search_diag_basis(false) {
            let last = found.last().unwrap();
            let c = self.trace_tab[self.mul_idx(last.idx, last.idx) as usize];
            let mut gram_diag = vec![1; self.n - 1];
            gram_diag.push(c);
            return Ok(SelfdualSearch {
                basis: Basis { kind: BasisKind::AlmostSelfdual, elements: found },
                gram_diag,
            });
        }
        Err(QpsError::NotSelfdual(format!(
            "no selfdual or almost-selfdual basis found in GF({}^{})",
            self.d, self.n
        )))
    }

    /// DFS over dlog-ordered subsets. `strict` demands tr(θ²)=1 on every
    /// diagonal slot; otherwise the last slot may have any nonzero trace.
    fn search_diag_basis(&self, strict: bool) -> Option<Vec<FieldElement>> {
        let n = self.n;
        let m = (self.q - 1) as usize;
        let mut chosen: Vec<FieldElement> = Vec::with_capacity(n);
        self.dfs_diag(0, m, strict, &mut chosen)
    }

    fn dfs_diag(
        &self,
        start: usize,
        m: usize,
        strict: bool,
        chosen: &mut Vec<FieldElement>,
    ) -> Option<Vec<FieldElement>> {
        let n = self.n;
        if chosen.len() == n {
            return Some(chosen.clone());
        }
        let last_slot = chosen.len() == n - 1;
        for a in start..m {
            let e = self.el(self.exp[a]);
            let diag = self.trace_tab[self.mul_idx(e.idx, e.idx) as usize];
            let diag_ok = if strict || !last_slot { diag == 1 } else { diag != 0 };
            if !diag_ok {
                continue;
            }
            if chosen.iter().any(|c| self.trace_tab[self.mul_idx(c.idx, e.idx) as usize] != 0) {
                continue;
            }
            chosen.push(e);
            if let Some(found) = self.dfs_diag(a + 1, m, strict, chosen) {
                return Some(found);
            }
            chosen.pop();
        }
        None
    }

    /// Coordinates `ℓ_j = tr(λ·θ̄_j)` of λ over the given basis.
    pub fn expand(&self, e: &FieldElement, basis: &Basis) -> Result<Vec<u64>> {
        self.check(e)?;
        let dual = self.dual_basis(&basis.elements)?;
        Ok(dual
            .iter()
            .map(|th| self.trace_tab[self.mul_idx(e.idx, th.idx) as usize])
            .collect())
    }

    /// Inverse of [`expand`]: `λ = Σ_j ℓ_j θ_j`.
    pub fn compose(&self, coords: &[u64], basis: &Basis) -> Result<FieldElement> {
        if coords.len() != basis.elements.len() {
            return Err(QpsError::LengthMismatch {
                expected: basis.elements.len(),
                got: coords.len(),
            });
        }
        let mut acc = 0u64;
        for (c, th) in coords.iter().zip(&basis.elements) {
            self.check(th)?;
            acc = self.add_idx(acc, self.mul_idx(c % self.d, th.idx));
        }
        Ok(self.el(acc))
    }

    /// Parse an element from text: `"0"`, `"1"`, `"s"`, `"s^k"`, a bare
    /// integer (a prime-subfield constant, reduced mod d), or a
    /// coefficient tuple `"(c1,...,cn)"`.
    pub fn parse_element(&self, text: &str) -> Result<FieldElement> {
        let t = text.trim();
        if t == "0" {
            return Ok(self.zero());
        }
        if t == "s" || t == "σ" {
            return Ok(self.sigma());
        }
        if let Some(rest) = t.strip_prefix("s^").or_else(|| t.strip_prefix("σ^")) {
            let k: u64 = rest
                .parse()
                .map_err(|_| QpsError::Format(format!("bad element literal {text:?}")))?;
            return Ok(self.sigma_pow(k));
        }
        if let Some(inner) = t.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
            let coeffs: Vec<u64> = inner
                .split(',')
                .map(|p| p.trim().parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| QpsError::Format(format!("bad element tuple {text:?}")))?;
            return self.element_from_coeffs(&coeffs);
        }
        if let Ok(v) = t.parse::<u64>() {
            // Bare integers name prime-subfield constants v·1, which are
            // basis-independent in every extension.
            let mut coeffs = vec![0u64; self.n];
            coeffs[0] = v % self.d;
            return self.element_from_coeffs(&coeffs);
        }
        Err(QpsError::Format(format!("bad element literal {text:?}")))
    }

    /// Canonical display form: `"0"` or `"s^k"`.
    pub fn format_element(&self, e: &FieldElement) -> String {
        match self.dlog(e) {
            None => "0".to_string(),
            Some(k) => format!("s^{k}"),
        }
    }

    /// Tuple display form `"(c1,...,cn)"`.
    pub fn format_element_tuple(&self, e: &FieldElement) -> String {
        let cs: Vec<String> = self.coeffs(e).iter().map(u64::to_string).collect();
        format!("({})", cs.join(","))
    }

}

/// Big-endian coordinate index: `(ℓ_1, …, ℓ_n) ↦ Σ_j ℓ_j d^{n−j}`.
///
/// This is the index of the tensor-product slot `|ℓ_1⟩⊗…⊗|ℓ_n⟩` under the
/// usual Kronecker convention (first factor most significant).
pub fn tuple_index_big_endian(coords: &[u64], d: u64) -> usize {
    coords.iter().fold(0usize, |acc, &c| acc * d as usize + c as usize)
}

// ---------------------------------------------------------------------------
// modulus search and polynomial arithmetic over Z_d
// ---------------------------------------------------------------------------

fn clone_err(e: &QpsError) -> QpsError {
    // QpsError is not Clone (io variants); the cached selfdual search only
    // ever stores NotSelfdual, which round-trips through its message.
    match e {
        QpsError::NotSelfdual(m) => QpsError::NotSelfdual(m.clone()),
        other => QpsError::Format(other.to_string()),
    }
}

fn context_tag(d: u64, n: usize, poly: &[u64]) -> u64 {
    // FNV-1a over (d, n, poly) — cheap fingerprint for mismatch detection.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: u64| {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
    };
    eat(d);
    eat(n as u64);
    for &c in poly {
        eat(c);
    }
    h
}

fn is_prime(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= d {
        if d % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

fn checked_pow(d: u64, n: usize) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..n {
        acc = acc.checked_mul(d)?;
    }
    Some(acc)
}

pub(crate) fn idx_to_coeffs(idx: u64, d: u64, n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut x = idx;
    for _ in 0..n {
        out.push(x % d);
        x /= d;
    }
    out
}

pub(crate) fn coeffs_to_idx(coeffs: &[u64], d: u64) -> u64 {
    coeffs.iter().rev().fold(0u64, |acc, &c| acc * d + c)
}

fn trim(p: &mut Vec<u64>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

/// Product of two coefficient vectors reduced mod (modulus, d).
fn poly_mul_mod(a: &[u64], b: &[u64], modulus: &[u64], d: u64) -> Vec<u64> {
    let n = modulus.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % d;
        }
    }
    poly_rem(&mut prod, modulus, d);
    prod.resize(n.max(1), 0);
    prod
}

/// In-place remainder of `p` by the monic `modulus` over Z_d.
fn poly_rem(p: &mut Vec<u64>, modulus: &[u64], d: u64) {
    let n = modulus.len() - 1;
    trim(p);
    while p.len() > n {
        let lead = *p.last().unwrap();
        let shift = p.len() - 1 - n;
        if lead != 0 {
            for (k, &mc) in modulus.iter().enumerate() {
                let pos = shift + k;
                p[pos] = (p[pos] + d * lead - (lead * mc) % d) % d;
            }
        }
        p.pop();
        trim(p);
    }
    if p.is_empty() {
        p.push(0);
    }
}

fn poly_pow_mod(base: &[u64], mut e: u64, modulus: &[u64], d: u64) -> Vec<u64> {
    let n = modulus.len() - 1;
    let mut result = vec![0u64; n.max(1)];
    result[0] = 1;
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mul_mod(&result, &b, modulus, d);
        }
        b = poly_mul_mod(&b, &b, modulus, d);
        e >>= 1;
    }
    result
}

fn is_one(p: &[u64]) -> bool {
    p.first() == Some(&1) && p.iter().skip(1).all(|&c| c == 0)
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut k = 2;
    while k * k <= m {
        if m % k == 0 {
            out.push(k);
            while m % k == 0 {
                m /= k;
            }
        }
        k += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Multiplicative order test via the prime factorization of q−1:
/// returns q−1 iff the element generates, otherwise some proper divisor
/// (enough for the primitivity decision; exact value not needed).
fn element_order(coeffs: &[u64], modulus: &[u64], d: u64, q: u64) -> u64 {
    if coeffs.iter().all(|&c| c == 0) {
        return 0;
    }
    let m = q - 1;
    if !is_one(&poly_pow_mod(coeffs, m, modulus, d)) {
        return 0; // not even a unit of full torsion — cannot happen in a field
    }
    for p in prime_factors(m) {
        if is_one(&poly_pow_mod(coeffs, m / p, modulus, d)) {
            return m / p;
        }
    }
    m
}

fn smallest_generator(modulus: &[u64], d: u64, n: usize, q: u64) -> Option<Vec<u64>> {
    for idx in 2..q {
        let c = idx_to_coeffs(idx, d, n);
        if element_order(&c, modulus, d, q) == q - 1 {
            return Some(c);
        }
    }
    None
}

fn is_irreducible(poly: &[u64], d: u64) -> bool {
    let n = poly.len() - 1;
    if n == 1 {
        return true;
    }
    // Trial division by every monic polynomial of degree 1..=n/2.
    for deg in 1..=n / 2 {
        let count = checked_pow(d, deg).unwrap();
        for enc in 0..count {
            let mut g = idx_to_coeffs(enc, d, deg);
            g.push(1); // monic
            let mut r = poly.to_vec();
            poly_rem_by(&mut r, &g, d);
            if r.iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Remainder by an arbitrary monic divisor (length ≥ 2).
fn poly_rem_by(p: &mut Vec<u64>, divisor: &[u64], d: u64) {
    let m = divisor.len() - 1;
    trim(p);
    while p.len() > m {
        let lead = *p.last().unwrap();
        let shift = p.len() - 1 - m;
        if lead != 0 {
            for (k, &gc) in divisor.iter().enumerate() {
                let pos = shift + k;
                p[pos] = (p[pos] + d * lead - (lead * gc) % d) % d;
            }
        }
        p.pop();
        trim(p);
    }
}

/// Canonical modulus: see [`make_field`].
fn default_poly(d: u64, n: usize) -> Vec<u64> {
    if n == 1 {
        let g = smallest_primitive_root(d);
        return vec![(d - g) % d, 1]; // x − g
    }
    // Lexicographic order on (a_{n−1}, …, a_1, a_0): a_0 is the fastest
    // digit, so counting enc upward with a_0 = enc mod d enumerates the
    // coefficient tuples in exactly that order.
    let count = checked_pow(d, n).unwrap();
    for enc in 0..count {
        let mut poly = idx_to_coeffs(enc, d, n); // little-endian (a_0, …, a_{n−1})
        poly.push(1); // monic
        if is_irreducible(&poly, d) {
            let xc = {
                let mut c = vec![0u64; n];
                c[1] = 1;
                c
            };
            if element_order(&xc, &poly, d, checked_pow(d, n).unwrap()) == checked_pow(d, n).unwrap() - 1
            {
                return poly;
            }
        }
    }
    unreachable!("primitive polynomials exist for every prime power");
}

fn smallest_primitive_root(d: u64) -> u64 {
    if d == 2 {
        return 1;
    }
    let m = d - 1;
    let factors = prime_factors(m);
    'cand: for g in 2..d {
        for &p in &factors {
            if pow_mod(g, m / p, d) == 1 {
                continue 'cand;
            }
        }
        return g;
    }
    unreachable!("Z_d has primitive roots for prime d");
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc: u64 = 1;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Gauss–Jordan inverse over Z_d (d prime); None when singular.
fn invert_matrix_mod(mat: &[Vec<u64>], d: u64) -> Option<Vec<Vec<u64>>> {
    let n = mat.len();
    let mut a: Vec<Vec<u64>> = mat.to_vec();
    let mut inv: Vec<Vec<u64>> = (0..n)
        .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| a[r][col] % d != 0)?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let pinv = pow_mod(a[col][col] % d, d - 2, d);
        for j in 0..n {
            a[col][j] = a[col][j] % d * pinv % d;
            inv[col][j] = inv[col][j] % d * pinv % d;
        }
        for r in 0..n {
            if r == col || a[r][col] % d == 0 {
                continue;
            }
            let f = a[r][col] % d;
            for j in 0..n {
                a[r][j] = (a[r][j] + d * d - f * a[col][j] % d) % d;
                inv[r][j] = (inv[r][j] + d * d - f * inv[col][j] % d) % d;
            }
        }
    }
    Some(inv)
}

// ---------------------------------------------------------------------------
// polynomial text form
// ---------------------------------------------------------------------------

/// Parse `"x^3+2x^2+1"`-style text into little-endian coefficients mod d.
pub fn parse_poly(text: &str, d: u64) -> Result<Vec<u64>> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(QpsError::InvalidPolynomial("empty polynomial".into()));
    }
    // Split on '+' and '-' keeping signs.
    let mut terms: Vec<(i64, String)> = Vec::new();
    let mut sign = 1i64;
    let mut cur = String::new();
    for ch in cleaned.chars() {
        match ch {
            '+' | '-' => {
                if cur.is_empty() && terms.is_empty() && ch == '-' {
                    sign = -1;
                } else if cur.is_empty() {
                    return Err(QpsError::InvalidPolynomial(format!("dangling sign in {text:?}")));
                } else {
                    terms.push((sign, std::mem::take(&mut cur)));
                    sign = if ch == '-' { -1 } else { 1 };
                }
            }
            _ => cur.push(ch),
        }
    }
    if cur.is_empty() {
        return Err(QpsError::InvalidPolynomial(format!("dangling sign in {text:?}")));
    }
    terms.push((sign, cur));

    let mut coeffs: Vec<u64> = Vec::new();
    for (sg, term) in terms {
        let (coef_str, deg) = if let Some(rest) = term.strip_prefix("x^") {
            (None, rest.parse::<usize>().ok())
        } else if term == "x" {
            (None, Some(1))
        } else if let Some(pos) = term.find('x') {
            let (c, x) = term.split_at(pos);
            let deg = if x == "x" {
                Some(1)
            } else {
                x.strip_prefix("x^").and_then(|r| r.parse::<usize>().ok())
            };
            (Some(c.to_string()), deg)
        } else {
            (Some(term.clone()), Some(0))
        };
        let deg = deg.ok_or_else(|| {
            QpsError::InvalidPolynomial(format!("bad term {term:?} in {text:?}"))
        })?;
        let c: u64 = match coef_str {
            None => 1,
            Some(s) if s.is_empty() => 1,
            Some(s) => s.parse().map_err(|_| {
                QpsError::InvalidPolynomial(format!("bad coefficient in term {term:?}"))
            })?,
        };
        let c = if sg < 0 { (d - c % d) % d } else { c % d };
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, 0);
        }
        coeffs[deg] = (coeffs[deg] + c) % d;
    }
    trim(&mut coeffs);
    Ok(coeffs)
}

/// Display form of little-endian coefficients: descending powers, `x^k`
/// notation, unit coefficients and zero terms omitted.
pub fn format_poly(coeffs: &[u64]) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (k, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let p = match (k, c) {
            (0, c) => format!("{c}"),
            (1, 1) => "x".to_string(),
            (1, c) => format!("{c}x"),
            (k, 1) => format!("x^{k}"),
            (k, c) => format!("{c}x^{k}"),
        };
        parts.push(p);
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join("+")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_text_round_trip() {
        for (text, d) in [("x^2+x+1", 2), ("x^3+2x^2+1", 3), ("x^2+x+2", 3), ("x+3", 5)] {
            let c = parse_poly(text, d).unwrap();
            assert_eq!(format_poly(&c), text);
        }
        assert_eq!(parse_poly("x^2 + x + 2", 3).unwrap(), vec![2, 1, 1]);
        assert_eq!(parse_poly("x^3-x-1", 3).unwrap(), vec![2, 2, 0, 1]);
        assert!(parse_poly("x^+3", 3).is_err());
    }

    #[test]
    fn default_moduli_are_canonical() {
        assert_eq!(make_field(2, 2, None).unwrap().poly_text(), "x^2+x+1");
        assert_eq!(make_field(2, 3, None).unwrap().poly_text(), "x^3+x+1");
        assert_eq!(make_field(3, 2, None).unwrap().poly_text(), "x^2+x+2");
        assert_eq!(make_field(3, 3, None).unwrap().poly_text(), "x^3+2x+1");
        // n = 1: x − g with g the smallest primitive root.
        assert_eq!(make_field(2, 1, None).unwrap().poly_text(), "x+1");
        assert_eq!(make_field(3, 1, None).unwrap().poly_text(), "x+1");
        assert_eq!(make_field(5, 1, None).unwrap().poly_text(), "x+3"); // g = 2
        assert_eq!(make_field(7, 1, None).unwrap().poly_text(), "x+4"); // g = 3
        assert_eq!(make_field(31, 1, None).unwrap().poly_text(), "x+28"); // g = 3
        assert_eq!(make_field(5, 1, None).unwrap().sigma().index(), 2);
        assert_eq!(make_field(7, 1, None).unwrap().sigma().index(), 3);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(make_field(4, 1, None), Err(QpsError::NotPrime(4))));
        assert!(matches!(make_field(6, 2, None), Err(QpsError::NotPrime(6))));
        assert!(matches!(
            make_field(2, 2, Some("x^2+1")),
            Err(QpsError::Reducible(_, 2)) // (x+1)^2
        ));
        assert!(matches!(
            make_field(2, 13, None),
            Err(QpsError::SizeCapExceeded { .. })
        ));
        assert!(make_field_capped(2, 13, None, 1 << 14).is_ok());
    }

    #[test]
    fn gf4_multiplication_table() {
        // With x²+x+1: elements {0, 1, σ, σ² = σ+1}, σ³ = 1, σ² = σ⁻¹.
        let f = make_field(2, 2, None).unwrap();
        let s = f.sigma();
        let s2 = f.mul(&s, &s).unwrap();
        assert_eq!(f.coeffs(&s2), vec![1, 1]); // σ² = 1 + σ
        assert_eq!(f.mul(&s, &s2).unwrap(), f.one()); // σ³ = 1
        assert_eq!(f.invert(&s).unwrap(), s2); // σ⁻¹ = σ²
        assert_eq!(f.mul(&s2, &s2).unwrap(), s); // σ⁴ = σ
        // Characteristic 2: addition is XOR on coefficients.
        assert_eq!(f.add(&s, &s).unwrap(), f.zero());
        assert_eq!(f.add(&s, &f.one()).unwrap(), s2);
    }

    #[test]
    fn gf4_dual_and_selfdual() {
        let f = make_field(2, 2, None).unwrap();
        let s = f.sigma();
        let s2 = f.mul(&s, &s).unwrap();
        // Dual of {1, σ} is {σ², 1}.
        let dual = f.dual_basis(&[f.one(), s]).unwrap();
        assert_eq!(dual, vec![s2, f.one()]);
        // The normal basis {σ, σ²} is selfdual, and it is the search result.
        let sd = f.find_selfdual_basis().unwrap();
        assert_eq!(sd.basis.kind, BasisKind::Selfdual);
        assert_eq!(sd.basis.elements, vec![s, s2]);
    }

    #[test]
    fn selfdual_search_results() {
        let f8 = make_field(2, 3, None).unwrap();
        let sd8 = f8.find_selfdual_basis().unwrap();
        assert_eq!(sd8.basis.kind, BasisKind::Selfdual);
        let dlogs: Vec<u64> =
            sd8.basis.elements.iter().map(|e| f8.dlog(e).unwrap()).collect();
        assert_eq!(dlogs, vec![3, 5, 6]);

        // GF(9): no selfdual basis exists (odd d, even n); the fallback is
        // almost-selfdual with Gram diag(1, 2).
        let f9 = make_field(3, 2, None).unwrap();
        let sd9 = f9.find_selfdual_basis().unwrap();
        assert_eq!(sd9.basis.kind, BasisKind::AlmostSelfdual);
        let dlogs9: Vec<u64> =
            sd9.basis.elements.iter().map(|e| f9.dlog(e).unwrap()).collect();
        assert_eq!(dlogs9, vec![2, 4]);
        assert_eq!(sd9.gram_diag, vec![1, 2]);

        let f27 = make_field(3, 3, Some("x^3+2x^2+1")).unwrap();
        let sd27 = f27.find_selfdual_basis().unwrap();
        assert_eq!(sd27.basis.kind, BasisKind::Selfdual);
        let dlogs27: Vec<u64> =
            sd27.basis.elements.iter().map(|e| f27.dlog(e).unwrap()).collect();
        assert_eq!(dlogs27, vec![1, 3, 9]);
    }

    #[test]
    fn gram_conditions_hold() {
        for (d, n, poly) in [(2, 2, None), (2, 3, None), (3, 3, Some("x^3+2x^2+1")), (2, 4, None)] {
            let f = make_field(d, n, poly).unwrap();
            let sd = f.find_selfdual_basis().unwrap();
            let th = &sd.basis.elements;
            for i in 0..n {
                for j in 0..n {
                    let t = f.trace(&f.mul(&th[i], &th[j]).unwrap()).unwrap();
                    assert_eq!(t, u64::from(i == j), "Gram mismatch at ({i},{j}) in GF({d}^{n})");
                }
            }
        }
    }

    #[test]
    fn expand_compose_round_trip() {
        let f = make_field(3, 3, Some("x^3+2x^2+1")).unwrap();
        let sd = f.find_selfdual_basis().unwrap().basis;
        let pb = f.polynomial_basis();
        for e in f.elements() {
            for basis in [&sd, &pb] {
                let coords = f.expand(&e, basis).unwrap();
                assert_eq!(f.compose(&coords, basis).unwrap(), e);
            }
        }
    }

    #[test]
    fn dual_of_dual_is_identity() {
        let f = make_field(3, 2, None).unwrap();
        let basis = vec![f.one(), f.sigma()];
        let dual = f.dual_basis(&basis).unwrap();
        let dd = f.dual_basis(&dual).unwrap();
        assert_eq!(dd, basis);
        for (i, th) in dual.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let t = f.trace(&f.mul(th, b).unwrap()).unwrap();
                assert_eq!(t, u64::from(i == j));
            }
        }
    }

    #[test]
    fn singular_gram_detected() {
        let f = make_field(3, 2, None).unwrap();
        let s = f.sigma();
        let s2 = f.add(&s, &s).unwrap(); // 2σ: dependent on σ
        assert!(matches!(f.dual_basis(&[s, s2]), Err(QpsError::SingularGram)));
    }

    #[test]
    fn non_primitive_modulus_warning() {
        // x²+1 is irreducible over Z₃ but its root has order 4 < 8.
        let f = make_field(3, 2, Some("x^2+1")).unwrap();
        assert_eq!(f.warnings().len(), 1);
        // σ found by search: smallest-index generator is x+1 (index 4).
        assert_eq!(f.sigma().index(), 4);
        // dlog tables are still consistent.
        let mut seen: Vec<u64> = f.elements().skip(1).map(|e| f.dlog(&e).unwrap()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn trace_is_z_d_linear_and_frobenius_invariant() {
        let f = make_field(3, 3, None).unwrap();
        for a in f.elements() {
            for b in f.elements().take(9) {
                let t_sum = f.trace(&f.add(&a, &b).unwrap()).unwrap();
                let sum_t = (f.trace(&a).unwrap() + f.trace(&b).unwrap()) % 3;
                assert_eq!(t_sum, sum_t);
            }
            // tr(λ^d) = tr(λ)
            let frob = f.pow(&a, 3).unwrap();
            assert_eq!(f.trace(&frob).unwrap(), f.trace(&a).unwrap());
        }
    }

    #[test]
    fn character_sums_vanish() {
        // Σ_λ χ(μλ) = q δ_{μ,0} — orthogonality behind every transform here.
        let f = make_field(2, 3, None).unwrap();
        for mu in f.elements() {
            let s: Complex64 = f
                .elements()
                .map(|l| f.character(&f.mul(&mu, &l).unwrap()).unwrap())
                .sum();
            let expect = if mu.is_zero() { f.q() as f64 } else { 0.0 };
            assert!((s - Complex64::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn element_text_round_trip() {
        let f = make_field(3, 2, None).unwrap();
        for e in f.elements() {
            let txt = f.format_element(&e);
            assert_eq!(f.parse_element(&txt).unwrap(), e);
            let tup = f.format_element_tuple(&e);
            assert_eq!(f.parse_element(&tup).unwrap(), e);
        }
        let f5 = make_field(5, 1, None).unwrap();
        assert_eq!(f5.parse_element("2").unwrap().index(), 2);
        assert!(f5.parse_element("junk").is_err());
    }

    #[test]
    fn context_mismatch_detected() {
        let f1 = make_field(3, 2, None).unwrap();
        let f2 = make_field(3, 2, Some("x^2+1")).unwrap();
        let a = f1.sigma();
        let b = f2.sigma();
        assert!(matches!(f1.mul(&a, &b), Err(QpsError::ContextMismatch)));
    }

    #[test]
    fn zero_inverse_rejected() {
        let f = make_field(5, 1, None).unwrap();
        assert!(matches!(f.invert(&f.zero()), Err(QpsError::ZeroInverse)));
    }

    #[test]
    fn big_endian_tuple_index() {
        assert_eq!(tuple_index_big_endian(&[1, 0], 2), 2);
        assert_eq!(tuple_index_big_endian(&[0, 1], 2), 1);
        assert_eq!(tuple_index_big_endian(&[2, 1, 0], 3), 21);
    }
}
