use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Largest total photon number a state may carry.
pub const MAX_PHOTONS: usize = 4;
const PRUNE_NORM_SQR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];

    fn offset(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

/// One single-photon mode: a spatial path and a polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mode {
    pub spatial: usize,
    pub polarization: Polarization,
}

impl Mode {
    pub fn new(spatial: usize, polarization: Polarization) -> Self {
        Self { spatial, polarization }
    }

    fn slot(self) -> usize {
        2 * self.spatial + self.polarization.offset()
    }
}

/// Photon counts indexed by `2 * spatial + polarization`.
pub type Occupation = Vec<u8>;

/// Sparse superposition of Fock basis states over `n_spatial × {H, V}` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedFockState {
    n_spatial: usize,
    amplitudes: BTreeMap<Occupation, C64>,
}

impl PolarizedFockState {
    pub fn vacuum(n_spatial: usize) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(vec![0; 2 * n_spatial], C64::new(1.0, 0.0));
        Self { n_spatial, amplitudes }
    }

    /// `Σ_t c_t Π_{m ∈ modes_t} a†_m |0⟩`. The result is not renormalized.
    pub fn from_creations(n_spatial: usize, terms: &[(C64, &[Mode])]) -> Result<Self> {
        let mut out = Self { n_spatial, amplitudes: BTreeMap::new() };
        for (coefficient, modes) in terms {
            let mut term = Self::vacuum(n_spatial);
            for mode in *modes {
                term = term.create(*mode)?;
            }
            for (occ, amp) in term.amplitudes {
                *out.amplitudes.entry(occ).or_default() += coefficient * amp;
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn n_spatial(&self) -> usize {
        self.n_spatial
    }

    fn check_mode(&self, spatial: usize) -> Result<()> {
        if spatial >= self.n_spatial {
            return Err(Error::UnknownMode { mode: spatial, n_modes: self.n_spatial });
        }
        Ok(())
    }

    /// Applies the creation operator `a†_mode`.
    pub fn create(&self, mode: Mode) -> Result<Self> {
        self.check_mode(mode.spatial)?;
        let mut out = BTreeMap::new();
        for (occ, amp) in &self.amplitudes {
            if occ.iter().map(|&n| n as usize).sum::<usize>() >= MAX_PHOTONS {
                return Err(Error::InvalidConfig(format!("Fock states are limited to {MAX_PHOTONS} photons")));
            }
            add_created(&mut out, occ, *amp, mode.slot(), C64::new(1.0, 0.0));
        }
        Ok(Self { n_spatial: self.n_spatial, amplitudes: out })
    }

    /// 50:50 beam splitter between spatial modes `a` and `b`, acting identically
    /// on both polarizations: `a† → (a† + b†)/√2`, `b† → (a† − b†)/√2`.
    pub fn apply_beam_splitter(&self, a: usize, b: usize) -> Result<Self> {
        self.check_mode(a)?;
        self.check_mode(b)?;
        if a == b {
            return Err(Error::InvalidConfig(format!("beam splitter needs two distinct modes, got {a} twice")));
        }
        let h = FRAC_1_SQRT_2;
        let mut out: BTreeMap<Occupation, C64> = BTreeMap::new();
        for (occ, amp) in &self.amplitudes {
            // Strip the photons in a and b, then re-create them in the output modes.
            let mut base = occ.clone();
            let mut scale = 1.0;
            let mut photons = Vec::new();
            for pol in Polarization::BOTH {
                for (spatial, sign) in [(a, 1.0), (b, -1.0)] {
                    let slot = Mode::new(spatial, pol).slot();
                    let n = occ[slot];
                    scale /= factorial(n).sqrt();
                    base[slot] = 0;
                    photons.extend(std::iter::repeat_n((pol, sign), n as usize));
                }
            }
            let mut partial = BTreeMap::new();
            partial.insert(base, amp * scale);
            for (pol, sign) in photons {
                let to_a = Mode::new(a, pol).slot();
                let to_b = Mode::new(b, pol).slot();
                let mut next = BTreeMap::new();
                for (o, v) in &partial {
                    add_created(&mut next, o, *v, to_a, C64::new(h, 0.0));
                    add_created(&mut next, o, *v, to_b, C64::new(sign * h, 0.0));
                }
                partial = next;
            }
            for (o, v) in partial {
                *out.entry(o).or_default() += v;
            }
        }
        let mut state = Self { n_spatial: self.n_spatial, amplitudes: out };
        state.prune();
        Ok(state)
    }

    fn prune(&mut self) {
        self.amplitudes.retain(|_, v| v.norm_sqr() > PRUNE_NORM_SQR);
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|v| v.norm_sqr()).sum()
    }

    pub fn amplitude(&self, occ: &[u8]) -> C64 {
        self.amplitudes.get(occ).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &C64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Total photon number of every basis component, if they all agree.
    pub fn photon_number(&self) -> Option<usize> {
        let mut counts = self.amplitudes.keys().map(|o| o.iter().map(|&n| n as usize).sum::<usize>());
        let first = counts.next()?;
        counts.all(|n| n == first).then_some(first)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.iter().map(|(occ, v)| v.conj() * other.amplitude(occ)).sum()
    }
}

/// Photons per spatial mode, summed over polarization.
pub fn spatial_counts(occ: &[u8]) -> Vec<usize> {
    occ.chunks(2).map(|c| c.iter().map(|&n| n as usize).sum()).collect()
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

fn add_created(out: &mut BTreeMap<Occupation, C64>, occ: &Occupation, amp: C64, slot: usize, coeff: C64) {
    let mut next = occ.clone();
    next[slot] += 1;
    let bosonic = (next[slot] as f64).sqrt();
    *out.entry(next).or_default() += amp * coeff * bosonic;
}
