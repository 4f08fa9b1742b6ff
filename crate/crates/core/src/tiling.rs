//! Randomized exact verification of translation and dilation tilings, and
//! the reference dilation tile `D`.
//!
//! Every sample is a rational point and every multiplicity is counted
//! exactly over a finite window that is provably complete, so a failure is
//! a genuine counterexample. A pass is evidence, not proof.

use std::ops::RangeInclusive;

use num_traits::{One, Signed, ToPrimitive};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freqset::{dilation_window, lattice_box, BoundingAnnulus, FrequencySet};
use crate::lattice::DilationMatrix;
use crate::rational::{self, serde_rational, Rational};
use crate::sampling::{
    dilate_point, point_in_cell, point_in_random_piece, point_in_set, sample_rng, CompiledSet, GridDilation, Location,
    PointRef, MAX_REDRAWS,
};

pub const DEFAULT_SAMPLES: usize = 10_000;

/// At most this many failing samples are kept per check.
pub const MAX_WITNESSES: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub check: String,
    pub sample: usize,
    #[serde(with = "serde_rational::vec")]
    pub point: Vec<Rational>,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranslationCheck {
    pub ok: bool,
    #[serde(with = "serde_rational")]
    pub volume: Rational,
    pub volume_ok: bool,
    pub samples_used: usize,
    pub k_window: Vec<(i64, i64)>,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DilationCheck {
    pub ok: bool,
    /// Set when the origin lies in the closure of the set and no finite window is sound.
    pub inconclusive: Option<String>,
    pub samples_used: usize,
    pub j_window: Option<(i32, i32)>,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TilingReport {
    pub translation_ok: bool,
    pub dilation_ok: bool,
    pub volume_ok: bool,
    pub inconclusive: Option<String>,
    pub witnesses: Vec<Witness>,
    pub samples_used: usize,
    pub j_window: Option<(i32, i32)>,
    pub k_window: Vec<(i64, i64)>,
}

impl TilingReport {
    pub fn passed(&self) -> bool {
        self.translation_ok && self.dilation_ok && self.volume_ok && self.inconclusive.is_none()
    }
}

/// `D = C0 \ B^(-1) C0` with `C0 = ⋃_{j<m} B^(-j) C` and `C = [-1/2, 1/2]^n`.
///
/// `B^(-m) C ⊆ C` because `||B^(-m)||_inf < 1`, hence `B^(-1) C0 ⊆ C0` and the
/// dilates of `D` partition `R^n \ {0}`.
pub fn build_dilation_tile(m: &DilationMatrix) -> Result<FrequencySet> {
    let cell = FrequencySet::unit_cell(m.n());
    let mut c0 = cell.clone();
    for j in 1..m.contraction_exponent() as i32 {
        c0 = c0.union(&cell.dilate(m, -j))?;
    }
    c0.difference(&c0.dilate(m, -1))
}

/// Integer shifts `k` with `x + k` in the closed box `[lo, hi]`.
pub(crate) fn point_translation_window(x: &[Rational], lo: &[Rational], hi: &[Rational]) -> Vec<Vec<i64>> {
    let ranges: Vec<(i64, i64)> = x
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(v, (l, h))| {
            let a = rational::ceil(&(l - v)).to_i64().expect("window fits");
            let b = rational::floor(&(h - v)).to_i64().expect("window fits");
            (a, b)
        })
        .collect();
    lattice_box(&ranges)
}

/// Translation windows over the closed box: `k` with `[lo, hi] + k` meeting `target`.
fn box_translation_ranges(lo: &[Rational], hi: &[Rational], tlo: &[Rational], thi: &[Rational]) -> Vec<(i64, i64)> {
    (0..lo.len())
        .map(|i| {
            let a = rational::ceil(&(&tlo[i] - &hi[i])).to_i64().expect("window fits");
            let b = rational::floor(&(&thi[i] - &lo[i])).to_i64().expect("window fits");
            (a, b)
        })
        .collect()
}

/// Per-sample outcome: `None` if every redraw landed on a null set.
type SampleOutcome = Option<(Vec<Rational>, u32)>;

fn collect(check: &str, outcomes: Vec<SampleOutcome>) -> (usize, Vec<Witness>) {
    let mut used = 0;
    let mut witnesses = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        if let Some((point, mult)) = o {
            used += 1;
            if mult != 1 && witnesses.len() < MAX_WITNESSES {
                witnesses.push(Witness { check: check.to_string(), sample: i, point, multiplicity: mult });
            }
        }
    }
    (used, witnesses)
}

/// Counts `#{k : x + k ∈ K}`; `None` if `x + k` hits a boundary for some `k`.
fn translation_multiplicity(k: &CompiledSet, bbox: &(Vec<Rational>, Vec<Rational>), x: &PointRef) -> Option<u32> {
    let xr = x.to_rational();
    let mut count = 0;
    for shift in point_translation_window(&xr, &bbox.0, &bbox.1) {
        match x.shifted(&shift).locate(k) {
            Location::Inside(_) => count += 1,
            Location::Boundary => return None,
            Location::Outside => {}
        }
    }
    Some(count)
}

/// Checks that the integer translates of `k` tile `R^n`.
pub fn check_translation_tiling(k: &FrequencySet, samples: usize, seed: u64) -> Result<TranslationCheck> {
    let volume = k.volume()?;
    let volume_ok = volume.is_one();
    let n = k.n();
    let Some(bbox) = k.bounding_box() else {
        return Ok(TranslationCheck {
            ok: false,
            volume,
            volume_ok,
            samples_used: 0,
            k_window: Vec::new(),
            witnesses: Vec::new(),
        });
    };
    let half = vec![rational::ratio(1, 2); n];
    let neg_half = vec![-rational::ratio(1, 2); n];
    let k_window = box_translation_ranges(&neg_half, &half, &bbox.0, &bbox.1);
    let compiled = CompiledSet::new(k);

    let outcomes: Vec<SampleOutcome> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            for _ in 0..MAX_REDRAWS {
                let x = if i % 2 == 0 {
                    point_in_cell(&mut rng, n)
                } else {
                    match point_in_random_piece(&mut rng, k) {
                        Some((_, y)) => y,
                        None => continue,
                    }
                };
                let x = PointRef::Grid(x);
                if let Some(mult) = translation_multiplicity(&compiled, &bbox, &x) {
                    return Some((x.to_rational(), mult));
                }
            }
            None
        })
        .collect();
    let (samples_used, witnesses) = collect("translation", outcomes);
    Ok(TranslationCheck { ok: witnesses.is_empty(), volume, volume_ok, samples_used, k_window, witnesses })
}

/// Sampling of the dilation tile `D` shared by the tiling and wavelet verifiers.
pub(crate) struct DilationShell<'a> {
    pub m: &'a DilationMatrix,
    pub grid: GridDilation,
    pub tile: CompiledSet,
    pub tile_annulus: BoundingAnnulus,
}

impl<'a> DilationShell<'a> {
    pub fn new(m: &'a DilationMatrix) -> Result<Self> {
        let tile = build_dilation_tile(m)?;
        let tile_annulus = tile.bounding_annulus().expect("dilation tile is nonempty");
        Ok(DilationShell { m, grid: GridDilation::new(m), tile: CompiledSet::new(&tile), tile_annulus })
    }

    /// All `j` for which `B^j D` can meet a set with annulus `target`.
    pub fn window(&self, target: &BoundingAnnulus, what: &str) -> Result<RangeInclusive<i32>> {
        dilation_window(self.m, &self.tile_annulus, target, what)
    }

    /// Even samples are uniform on `D`; odd samples pick a piece of `support`
    /// and pull the point back into `D`, so small pieces are exercised.
    pub fn draw<R: Rng>(&self, rng: &mut R, index: usize, support: &FrequencySet) -> Option<PointRef> {
        if index.is_multiple_of(2) || support.is_empty() {
            return point_in_set(rng, &self.tile).map(PointRef::Grid);
        }
        let (_, y) = point_in_random_piece(rng, support)?;
        let y = PointRef::Grid(y);
        let norm = y.inf_norm();
        let point = BoundingAnnulus { rho_min: norm.clone(), rho_max: norm };
        let window = dilation_window(self.m, &point, &self.tile_annulus, "sample").ok()?;
        for j in window {
            let x = match &y {
                PointRef::Grid(g) => dilate_point(&self.grid, self.m, g, j),
                PointRef::Exact(v) => PointRef::Exact(self.m.apply_b(j, v)),
            };
            match x.locate(&self.tile) {
                Location::Inside(_) => return Some(x),
                Location::Boundary => return None,
                Location::Outside => {}
            }
        }
        None
    }

    pub fn dilate(&self, x: &PointRef, j: i32) -> PointRef {
        match x {
            PointRef::Grid(g) => dilate_point(&self.grid, self.m, g, j),
            PointRef::Exact(v) => PointRef::Exact(self.m.apply_b(j, v)),
        }
    }
}

/// Checks that the dilates `B^j K` tile `R^n`, sampling the reference tile `D`.
pub fn check_dilation_tiling(k: &FrequencySet, m: &DilationMatrix, samples: usize, seed: u64) -> Result<DilationCheck> {
    if k.n() != m.n() {
        return Err(Error::DimensionMismatch { expected: m.n(), found: k.n() });
    }
    let annulus = match k.bounding_annulus() {
        Some(a) if a.rho_min.is_positive() => a,
        Some(_) => {
            return Ok(DilationCheck {
                ok: false,
                inconclusive: Some("the origin lies in the closure of the set".into()),
                samples_used: 0,
                j_window: None,
                witnesses: Vec::new(),
            })
        }
        None => {
            return Ok(DilationCheck {
                ok: false,
                inconclusive: None,
                samples_used: 0,
                j_window: None,
                witnesses: Vec::new(),
            })
        }
    };
    let shell = DilationShell::new(m)?;
    let window = shell.window(&annulus, "dilation check")?;
    let compiled = CompiledSet::new(k);

    let outcomes: Vec<SampleOutcome> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            'draw: for _ in 0..MAX_REDRAWS {
                let Some(x) = shell.draw(&mut rng, i, k) else { continue };
                let mut count = 0;
                for j in window.clone() {
                    match shell.dilate(&x, j).locate(&compiled) {
                        Location::Inside(_) => count += 1,
                        Location::Boundary => continue 'draw,
                        Location::Outside => {}
                    }
                }
                return Some((x.to_rational(), count));
            }
            None
        })
        .collect();
    let (samples_used, witnesses) = collect("dilation", outcomes);
    Ok(DilationCheck {
        ok: witnesses.is_empty(),
        inconclusive: None,
        samples_used,
        j_window: Some((*window.start(), *window.end())),
        witnesses,
    })
}

/// Both tiling conditions of a wavelet set.
pub fn verify_wavelet_set(k: &FrequencySet, m: &DilationMatrix, samples: usize, seed: u64) -> Result<TilingReport> {
    let t = check_translation_tiling(k, samples, seed)?;
    let d = check_dilation_tiling(k, m, samples, seed)?;
    let mut witnesses = t.witnesses;
    witnesses.extend(d.witnesses);
    Ok(TilingReport {
        translation_ok: t.ok,
        dilation_ok: d.ok,
        volume_ok: t.volume_ok,
        inconclusive: d.inconclusive,
        witnesses,
        samples_used: t.samples_used + d.samples_used,
        j_window: d.j_window,
        k_window: t.k_window,
    })
}
