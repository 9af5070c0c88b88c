//! Sparse wavefunction simulator: factorized UCCSD over Slater
//! determinants with amplitude-count truncation and Slater-Condon energy
//! evaluation.
//!
//! Spin orbitals are ordered alpha block then beta block, ascending
//! spatial index; fermionic parities count occupied spin orbitals below
//! the action site. Each UCCSD factor exp(theta (E - E^T)) acts as an
//! exact Givens rotation on every connected determinant pair, so state
//! preparation is unitary until truncation kicks in.
//!
//! Amplitudes are real: the generator is real antisymmetric and the
//! reference is real.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::{ChemError, MolecularIntegrals, Mp2Guess};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum SwsError {
    #[error("orbital index {index} out of range for {n_orb} orbitals")]
    OrbitalOutOfRange { index: usize, n_orb: usize },
    #[error("{n_orb} orbitals exceed the supported maximum of 32")]
    TooManyOrbitals { n_orb: usize },
    #[error("factor reuses a spin orbital across its occupied/virtual sets")]
    OverlappingIndices,
    #[error("factor does not conserve spin per excitation channel")]
    SpinViolation,
    #[error("expected {expected} parameters, got {found}")]
    ParamCountMismatch { expected: usize, found: usize },
    #[error("parameter indices must cover 0..{expected} exactly; index {index} unused")]
    ParamIndexGap { expected: usize, index: usize },
    #[error("wavefunction spans {psi} orbitals, integrals {integrals}")]
    OrbitalCountMismatch { psi: usize, integrals: usize },
    #[error("reference determinant needs an even electron count, got {0}")]
    OddElectronCount(usize),
    #[error("truncation bounds need 1 <= n_cut <= n_max, got n_cut={n_cut}, n_max={n_max}")]
    BadTruncationBounds { n_cut: usize, n_max: usize },
    #[error(transparent)]
    Chem(#[from] ChemError),
}

/// Occupation bitmasks over spatial orbitals, one per spin channel.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize,
)]
pub struct Determinant {
    pub alpha: u64,
    pub beta: u64,
}

impl Determinant {
    /// Closed-shell reference: the lowest n_elec/2 orbitals doubly occupied.
    pub fn closed_shell_reference(n_elec: usize) -> Result<Self, SwsError> {
        if n_elec % 2 != 0 {
            return Err(SwsError::OddElectronCount(n_elec));
        }
        let mask = if n_elec == 0 { 0 } else { (1u64 << (n_elec / 2)) - 1 };
        Ok(Self { alpha: mask, beta: mask })
    }

    pub fn n_elec(self) -> usize {
        (self.alpha.count_ones() + self.beta.count_ones()) as usize
    }

    /// Combined qubit-basis index with alpha block in the low bits.
    pub fn basis_index(self, n_orb: usize) -> u64 {
        self.alpha | (self.beta << n_orb)
    }

    /// Occupancy string, spin orbital 0 leftmost, alpha block then beta.
    pub fn bitstring(self, n_orb: usize) -> String {
        let mut s = String::with_capacity(2 * n_orb);
        for p in 0..n_orb {
            s.push(if self.alpha >> p & 1 == 1 { '1' } else { '0' });
        }
        for p in 0..n_orb {
            s.push(if self.beta >> p & 1 == 1 { '1' } else { '0' });
        }
        s
    }

    fn occupied(self, g: usize, n_orb: usize) -> bool {
        if g < n_orb {
            self.alpha >> g & 1 == 1
        } else {
            self.beta >> (g - n_orb) & 1 == 1
        }
    }

    /// Occupied spin orbitals strictly below g in the global ordering.
    fn parity_count(self, g: usize, n_orb: usize) -> u32 {
        if g < n_orb {
            (self.alpha & ((1u64 << g) - 1)).count_ones()
        } else {
            let below = g - n_orb;
            let mask = if below == 0 { 0 } else { (1u64 << below) - 1 };
            self.alpha.count_ones() + (self.beta & mask).count_ones()
        }
    }

    fn toggle(&mut self, g: usize, n_orb: usize) {
        if g < n_orb {
            self.alpha ^= 1 << g;
        } else {
            self.beta ^= 1 << (g - n_orb);
        }
    }

    fn occupied_list(self, n_orb: usize) -> Vec<usize> {
        let mut occ = Vec::with_capacity(self.n_elec());
        for p in 0..n_orb {
            if self.alpha >> p & 1 == 1 {
                occ.push(p);
            }
        }
        for p in 0..n_orb {
            if self.beta >> p & 1 == 1 {
                occ.push(n_orb + p);
            }
        }
        occ
    }
}

/// Apply an ordered annihilation/creation string to a determinant,
/// tracking the fermionic sign. Returns None when any step vanishes.
fn apply_ops(
    mut d: Determinant,
    n_orb: usize,
    ann: &[usize],
    cre: &[usize],
) -> Option<(Determinant, i8)> {
    let mut sign = 1i8;
    for &g in ann {
        if !d.occupied(g, n_orb) {
            return None;
        }
        if d.parity_count(g, n_orb) % 2 == 1 {
            sign = -sign;
        }
        d.toggle(g, n_orb);
    }
    for &g in cre {
        if d.occupied(g, n_orb) {
            return None;
        }
        if d.parity_count(g, n_orb) % 2 == 1 {
            sign = -sign;
        }
        d.toggle(g, n_orb);
    }
    Some((d, sign))
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Spin {
    Alpha,
    Beta,
}

impl Spin {
    fn offset(self, n_orb: usize) -> usize {
        match self {
            Spin::Alpha => 0,
            Spin::Beta => n_orb,
        }
    }

    fn label(self) -> char {
        match self {
            Spin::Alpha => 'a',
            Spin::Beta => 'b',
        }
    }
}

/// One factor of the factorized UCCSD product: a single or double
/// excitation rotated by a shared parameter.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct UccFactor {
    /// Occupied (orbital, spin) pairs; one entry for singles, two for doubles.
    pub occ: Vec<(usize, Spin)>,
    /// Virtual (orbital, spin) pairs, channel-aligned with `occ`.
    pub virt: Vec<(usize, Spin)>,
    /// Slot into the shared parameter vector.
    pub param_index: usize,
}

impl UccFactor {
    pub fn single(i: usize, a: usize, spin: Spin, param_index: usize) -> Self {
        Self { occ: vec![(i, spin)], virt: vec![(a, spin)], param_index }
    }

    /// Mixed-spin double: i-alpha, j-beta -> a-alpha, b-beta.
    pub fn double(i: usize, j: usize, a: usize, b: usize, param_index: usize) -> Self {
        Self {
            occ: vec![(i, Spin::Alpha), (j, Spin::Beta)],
            virt: vec![(a, Spin::Alpha), (b, Spin::Beta)],
            param_index,
        }
    }

    pub fn is_single(&self) -> bool {
        self.occ.len() == 1
    }

    pub fn validate(&self, n_orb: usize) -> Result<(), SwsError> {
        if self.occ.len() != self.virt.len() || self.occ.is_empty() || self.occ.len() > 2 {
            return Err(SwsError::SpinViolation);
        }
        for (&(i, si), &(a, sa)) in self.occ.iter().zip(&self.virt) {
            if i >= n_orb {
                return Err(SwsError::OrbitalOutOfRange { index: i, n_orb });
            }
            if a >= n_orb {
                return Err(SwsError::OrbitalOutOfRange { index: a, n_orb });
            }
            if si != sa {
                return Err(SwsError::SpinViolation);
            }
        }
        let mut seen: Vec<usize> = self
            .occ
            .iter()
            .chain(&self.virt)
            .map(|&(p, s)| p + s.offset(n_orb))
            .collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(SwsError::OverlappingIndices);
        }
        Ok(())
    }

    /// Annihilation and creation lists in rightmost-first operator order
    /// for E = cre(v0) cre(v1) ann(o1) ann(o0).
    fn op_lists(&self, n_orb: usize) -> (Vec<usize>, Vec<usize>) {
        let g = |&(p, s): &(usize, Spin)| p + s.offset(n_orb);
        let ann: Vec<usize> = self.occ.iter().map(g).collect();
        let cre: Vec<usize> = self.virt.iter().rev().map(g).collect();
        (ann, cre)
    }
}

/// Real-amplitude wavefunction stored as determinant -> amplitude.
/// Iteration order (and thus every summation) is sorted by determinant.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SparseWavefunction<R: Real> {
    n_orb: usize,
    n_elec: usize,
    amps: BTreeMap<Determinant, R>,
}

impl<R: Real> SparseWavefunction<R> {
    pub fn reference(n_orb: usize, n_elec: usize) -> Result<Self, SwsError> {
        if n_orb > 32 {
            return Err(SwsError::TooManyOrbitals { n_orb });
        }
        let d = Determinant::closed_shell_reference(n_elec)?;
        if n_elec > 0 && (n_elec / 2) > n_orb {
            return Err(SwsError::OrbitalOutOfRange { index: n_elec / 2 - 1, n_orb });
        }
        let mut amps = BTreeMap::new();
        amps.insert(d, R::one());
        Ok(Self { n_orb, n_elec, amps })
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    pub fn n_elec(&self) -> usize {
        self.n_elec
    }

    pub fn n_dets(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, d: &Determinant) -> R {
        self.amps.get(d).copied().unwrap_or_else(R::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Determinant, &R)> {
        self.amps.iter()
    }

    pub fn norm_sqr(&self) -> R {
        self.amps.values().map(|&a| a * a).sum()
    }

    fn set(&mut self, d: Determinant, a: R) {
        if a == R::zero() {
            self.amps.remove(&d);
        } else {
            self.amps.insert(d, a);
        }
    }

    /// `bitstring amplitude` lines for debugging, sorted by determinant.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (d, a) in &self.amps {
            let _ = writeln!(out, "{} {:+.12e}", d.bitstring(self.n_orb), a.as_f64());
        }
        out
    }
}

/// Rotate every determinant pair connected by the factor's excitation:
/// amp(D) -> cos t * amp(D) - s sin t * amp(D'), and the excited partner
/// picks up + s sin t * amp(D), with s the fermionic parity of the
/// operator string. Unitary before truncation.
pub fn apply_factor<R: Real>(
    psi: &SparseWavefunction<R>,
    f: &UccFactor,
    theta: R,
) -> Result<SparseWavefunction<R>, SwsError> {
    f.validate(psi.n_orb)?;
    let (ann, cre) = f.op_lists(psi.n_orb);
    let (cos_t, sin_t) = (theta.cos(), theta.sin());
    // Collect connected pairs keyed by source determinant; a pair matters
    // when either member carries amplitude.
    let mut pairs: BTreeMap<Determinant, (Determinant, i8)> = BTreeMap::new();
    for d in psi.amps.keys() {
        if let Some((tgt, sign)) = apply_ops(*d, psi.n_orb, &ann, &cre) {
            pairs.insert(*d, (tgt, sign));
        } else if let Some((src, _)) = apply_ops(*d, psi.n_orb, &cre, &ann) {
            // De-excite to find the source; the rotation sign is defined
            // by the forward application.
            let (tgt, sign) = apply_ops(src, psi.n_orb, &ann, &cre)
                .expect("forward excitation of a de-excited determinant");
            debug_assert_eq!(tgt, *d);
            pairs.insert(src, (tgt, sign));
        }
    }
    let mut out = psi.clone();
    for (src, (tgt, sign)) in pairs {
        let s = if sign > 0 { R::one() } else { -R::one() };
        let a = psi.amplitude(&src);
        let b = psi.amplitude(&tgt);
        out.set(src, cos_t * a - s * sin_t * b);
        out.set(tgt, s * sin_t * a + cos_t * b);
    }
    Ok(out)
}

/// When more than n_max determinants are stored, keep the n_cut largest
/// by |amplitude| (ties: determinant ascending) and renormalize.
pub fn truncate<R: Real>(
    psi: &SparseWavefunction<R>,
    n_cut: usize,
    n_max: usize,
) -> Result<SparseWavefunction<R>, SwsError> {
    if n_cut == 0 || n_cut > n_max {
        return Err(SwsError::BadTruncationBounds { n_cut, n_max });
    }
    if psi.amps.len() <= n_max {
        return Ok(psi.clone());
    }
    let mut entries: Vec<(Determinant, R)> = psi.amps.iter().map(|(d, a)| (*d, *a)).collect();
    entries.sort_by(|(da, a), (db, b)| {
        b.abs()
            .partial_cmp(&a.abs())
            .expect("finite amplitudes")
            .then_with(|| da.cmp(db))
    });
    entries.truncate(n_cut);
    let norm = entries.iter().map(|(_, a)| *a * *a).sum::<R>().sqrt();
    let mut amps = BTreeMap::new();
    for (d, a) in entries {
        let v = a / norm;
        if v != R::zero() {
            amps.insert(d, v);
        }
    }
    Ok(SparseWavefunction { n_orb: psi.n_orb, n_elec: psi.n_elec, amps })
}

/// Ordered UCCSD factor product with truncation bounds and the shared
/// parameter layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct UccAnsatz<R: Real> {
    pub n_orb: usize,
    pub n_elec: usize,
    pub reference: Determinant,
    pub factors: Vec<UccFactor>,
    /// Starting parameter values (MP2 guess for doubles, zero for singles).
    pub params: Vec<R>,
    pub n_cut: usize,
    pub n_max: usize,
}

impl<R: Real> UccAnsatz<R> {
    pub fn new(
        n_orb: usize,
        n_elec: usize,
        factors: Vec<UccFactor>,
        params: Vec<R>,
        n_cut: usize,
        n_max: usize,
    ) -> Result<Self, SwsError> {
        if n_orb > 32 {
            return Err(SwsError::TooManyOrbitals { n_orb });
        }
        if n_cut == 0 || n_cut > n_max {
            return Err(SwsError::BadTruncationBounds { n_cut, n_max });
        }
        let n_params = params.len();
        let mut used = vec![false; n_params];
        for f in &factors {
            f.validate(n_orb)?;
            if f.param_index >= n_params {
                return Err(SwsError::ParamCountMismatch {
                    expected: n_params,
                    found: f.param_index + 1,
                });
            }
            used[f.param_index] = true;
        }
        if let Some(index) = used.iter().position(|&u| !u) {
            return Err(SwsError::ParamIndexGap { expected: n_params, index });
        }
        let reference = Determinant::closed_shell_reference(n_elec)?;
        Ok(Self { n_orb, n_elec, reference, factors, params, n_cut, n_max })
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Apply the factor product to the reference, truncating after each
    /// factor whenever the stored count exceeds n_max.
    pub fn prepare_state(&self, params: &[R]) -> Result<SparseWavefunction<R>, SwsError> {
        if params.len() != self.params.len() {
            return Err(SwsError::ParamCountMismatch {
                expected: self.params.len(),
                found: params.len(),
            });
        }
        let mut psi = SparseWavefunction::reference(self.n_orb, self.n_elec)?;
        for f in &self.factors {
            psi = apply_factor(&psi, f, params[f.param_index])?;
            if psi.n_dets() > self.n_max {
                psi = truncate(&psi, self.n_cut, self.n_max)?;
            }
        }
        Ok(psi)
    }

    /// Operator list with indices and parameter values, one factor per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# n_orb={} n_elec={} n_cut={} n_max={} n_params={}",
            self.n_orb,
            self.n_elec,
            self.n_cut,
            self.n_max,
            self.params.len()
        );
        for f in &self.factors {
            let kind = if f.is_single() { "single" } else { "double" };
            let _ = write!(out, "{kind} p{}:", f.param_index);
            for (&(i, s), &(a, sv)) in f.occ.iter().zip(&f.virt) {
                let _ = write!(out, " {}{}->{}{}", i, s.label(), a, sv.label());
            }
            let _ = writeln!(out, " theta={:+.12e}", self.params[f.param_index].as_f64());
        }
        out
    }
}

/// Spatial-orbital point-group product test: irrep labels follow the
/// integer convention where the product is XOR on (label - 1).
fn symmetry_allowed(orbsym: &[u32], orbs: &[usize]) -> bool {
    orbs.iter()
        .fold(0u32, |acc, &p| acc ^ orbsym[p].saturating_sub(1))
        == 0
}

/// Pick the ansatz operators from an MP2 guess: mixed-spin doubles sorted
/// by |t2| descending (canonical (i,a) <= (j,b) orientation, ties by index
/// tuple), truncated to n_doubles, then spin-paired singles ordered by
/// orbital indices. Factors whose orbital irreps multiply to a non-trivial
/// irrep are removed.
pub fn select_operators<R: Real>(
    guess: &Mp2Guess<R>,
    n_doubles: usize,
    orbsym: &[u32],
) -> Vec<UccFactor> {
    let mut doubles: Vec<(R, (usize, usize, usize, usize))> = Vec::new();
    for (&(i, j, a, b), &t) in &guess.t2 {
        if (i, a) > (j, b) {
            continue; // canonical orientation; the mirror has equal t2
        }
        if !symmetry_allowed(orbsym, &[i, j, a, b]) {
            continue;
        }
        if t != R::zero() {
            doubles.push((t, (i, j, a, b)));
        }
    }
    doubles.sort_by(|(ta, ka), (tb, kb)| {
        tb.abs()
            .partial_cmp(&ta.abs())
            .expect("finite amplitudes")
            .then_with(|| ka.cmp(kb))
    });
    doubles.truncate(n_doubles);

    let mut factors = Vec::new();
    let mut param_index = 0;
    for &(_, (i, j, a, b)) in &doubles {
        factors.push(UccFactor::double(i, j, a, b, param_index));
        param_index += 1;
    }
    for i in 0..guess.n_occ {
        for a in guess.n_occ..guess.n_orb {
            if !symmetry_allowed(orbsym, &[i, a]) {
                continue;
            }
            factors.push(UccFactor::single(i, a, Spin::Alpha, param_index));
            factors.push(UccFactor::single(i, a, Spin::Beta, param_index));
            param_index += 1;
        }
    }
    factors
}

/// Starting values: the MP2 amplitude for each double, zero for singles.
pub fn initial_parameters<R: Real>(guess: &Mp2Guess<R>, factors: &[UccFactor]) -> Vec<R> {
    let n_params = factors.iter().map(|f| f.param_index + 1).max().unwrap_or(0);
    let mut params = vec![R::zero(); n_params];
    for f in factors {
        if !f.is_single() {
            let (i, j) = (f.occ[0].0, f.occ[1].0);
            let (a, b) = (f.virt[0].0, f.virt[1].0);
            params[f.param_index] = guess.t2(i, j, a, b);
        }
    }
    params
}

/// Slater-Condon energy <psi|H|psi> + e_core over determinant pairs
/// differing in at most two spin orbitals. Real amplitudes make the
/// off-diagonal contributions symmetric, counted once and doubled.
pub fn energy<R: Real>(
    psi: &SparseWavefunction<R>,
    m: &MolecularIntegrals<R>,
) -> Result<R, SwsError> {
    if psi.n_orb != m.n_orb() {
        return Err(SwsError::OrbitalCountMismatch { psi: psi.n_orb, integrals: m.n_orb() });
    }
    let n = psi.n_orb;
    let spin = |g: usize| g >= n;
    let orb = |g: usize| if g >= n { g - n } else { g };
    let two = R::of(2.0);
    let half = R::of(0.5);

    let dets: Vec<(Determinant, R)> = psi.amps.iter().map(|(d, a)| (*d, *a)).collect();
    let occs: Vec<Vec<usize>> = dets.iter().map(|(d, _)| d.occupied_list(n)).collect();

    let mut e = m.e_core() * psi.norm_sqr();
    for (row, (d1, a1)) in dets.iter().enumerate() {
        // Diagonal.
        let occ1 = &occs[row];
        let mut diag = R::zero();
        for &g in occ1 {
            diag += m.h1(orb(g), orb(g));
        }
        for &g in occ1 {
            for &g2 in occ1 {
                if g == g2 {
                    continue;
                }
                let mut v = m.eri(orb(g), orb(g), orb(g2), orb(g2));
                if spin(g) == spin(g2) {
                    v -= m.eri(orb(g), orb(g2), orb(g2), orb(g));
                }
                diag += half * v;
            }
        }
        e += diag * *a1 * *a1;

        // Off-diagonal, row < col only.
        for (col, (d2, a2)) in dets.iter().enumerate().skip(row + 1) {
            let diff = (d1.alpha ^ d2.alpha).count_ones() + (d1.beta ^ d2.beta).count_ones();
            if diff > 4 {
                continue;
            }
            let only1: Vec<usize> = occ1
                .iter()
                .copied()
                .filter(|&g| !d2.occupied(g, n))
                .collect();
            let only2: Vec<usize> = occs[col]
                .iter()
                .copied()
                .filter(|&g| !d1.occupied(g, n))
                .collect();
            let elem = match only1.len() {
                1 => {
                    let (i, a) = (only1[0], only2[0]);
                    if spin(i) != spin(a) {
                        continue;
                    }
                    let Some((aligned, sign)) = apply_ops(*d1, n, &[i], &[a]) else {
                        continue;
                    };
                    debug_assert_eq!(aligned, *d2);
                    let mut v = m.h1(orb(i), orb(a));
                    for &g in occ1 {
                        if g == i {
                            continue;
                        }
                        v += m.eri(orb(i), orb(a), orb(g), orb(g));
                        if spin(g) == spin(i) {
                            v -= m.eri(orb(i), orb(g), orb(g), orb(a));
                        }
                    }
                    let s = if sign > 0 { R::one() } else { -R::one() };
                    s * v
                }
                2 => {
                    let (i, j) = (only1[0], only1[1]);
                    let (a, b) = (only2[0], only2[1]);
                    let Some((aligned, sign)) = apply_ops(*d1, n, &[i, j], &[b, a]) else {
                        continue;
                    };
                    debug_assert_eq!(aligned, *d2);
                    let mut v = R::zero();
                    if spin(i) == spin(a) && spin(j) == spin(b) {
                        v += m.eri(orb(i), orb(a), orb(j), orb(b));
                    }
                    if spin(i) == spin(b) && spin(j) == spin(a) {
                        v -= m.eri(orb(i), orb(b), orb(j), orb(a));
                    }
                    let s = if sign > 0 { R::one() } else { -R::one() };
                    s * v
                }
                _ => continue,
            };
            e += two * elem * *a1 * *a2;
        }
    }
    Ok(e)
}
