//! Per-respondent randomization schemes.
//!
//! Threshold mechanisms draw a private pseudorandom number Υ uniformly on
//! `[m, M)` and the respondent answers a yes/no question comparing their
//! value with Υ. Card-deck baselines (Eriksson, Chaudhuri) mask the value
//! with card draws instead. Every mechanism has a transform `z -> r` with
//! `E(r) = y` for `y` inside its range, and a closed-form per-unit variance.
//!
//! Every `respond_*` function has an `_at` twin taking the realized Υ (or
//! card indices) explicitly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::UniformInterval;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuestionTag {
    /// "Is your value at least Υ?"
    AtLeast,
    /// "Is your value smaller than Υ?"
    SmallerThan,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizedResponse {
    /// Raw answer as recorded by the interviewer.
    pub z: f64,
    /// Transformed response with `E(r) = y`.
    pub r: f64,
    /// Present only when the interviewer learns Υ.
    pub upsilon: Option<f64>,
    /// Present only for the switching-question mechanism.
    pub question: Option<QuestionTag>,
}

fn check_in_range(y: f64, iv: &UniformInterval) -> Result<()> {
    if y >= iv.lo && y <= iv.hi {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            y,
            lo: iv.lo,
            hi: iv.hi,
        })
    }
}

// ---------------------------------------------------------------------------
// basic threshold question

pub fn respond_basic_at(y: f64, iv: &UniformInterval, upsilon: f64) -> RandomizedResponse {
    let z = if upsilon <= y { 1.0 } else { 0.0 };
    RandomizedResponse {
        z,
        r: iv.lo + iv.width() * z,
        upsilon: None,
        question: None,
    }
}

pub fn respond_basic<R: Rng + ?Sized>(
    rng: &mut R,
    y: f64,
    iv: &UniformInterval,
) -> Result<RandomizedResponse> {
    iv.validate()?;
    Ok(respond_basic_at(y, iv, iv.sample(rng)))
}

/// "Is your value lower than Υ?" The recorded answer is `z* = 1 - z`; the
/// transform recodes it back, `r = m + (M - m)(1 - z*)`.
pub fn respond_basic_complement_at(
    y: f64,
    iv: &UniformInterval,
    upsilon: f64,
) -> RandomizedResponse {
    let z_star = if y < upsilon { 1.0 } else { 0.0 };
    RandomizedResponse {
        z: z_star,
        r: iv.lo + iv.width() * (1.0 - z_star),
        upsilon: None,
        question: None,
    }
}

pub fn respond_basic_complement<R: Rng + ?Sized>(
    rng: &mut R,
    y: f64,
    iv: &UniformInterval,
) -> Result<RandomizedResponse> {
    iv.validate()?;
    Ok(respond_basic_complement_at(y, iv, iv.sample(rng)))
}

/// `(y - m)(M - y)`.
pub fn unit_variance_basic(y: f64, iv: &UniformInterval) -> Result<f64> {
    iv.validate()?;
    check_in_range(y, iv)?;
    Ok((y - iv.lo) * (iv.hi - y))
}

// ---------------------------------------------------------------------------
// α mechanism: the interviewer also learns Υ

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaConfig {
    pub alpha: f64,
    pub bounds: UniformInterval,
}

impl AlphaConfig {
    pub fn new(alpha: f64, bounds: UniformInterval) -> Result<Self> {
        let cfg = AlphaConfig { alpha, bounds };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(Error::AlphaOutOfRange(self.alpha));
        }
        Ok(())
    }
}

pub fn respond_alpha_at(y: f64, cfg: &AlphaConfig, upsilon: f64) -> RandomizedResponse {
    let (a, iv) = (cfg.alpha, &cfg.bounds);
    let w = iv.width();
    let base = if upsilon <= y { 1.0 - a } else { -a };
    let z = base + 2.0 * a * upsilon / w;
    RandomizedResponse {
        z,
        r: w * z + iv.lo * (1.0 - 2.0 * a),
        upsilon: Some(upsilon),
        question: None,
    }
}

pub fn respond_alpha<R: Rng + ?Sized>(
    rng: &mut R,
    y: f64,
    cfg: &AlphaConfig,
) -> Result<RandomizedResponse> {
    cfg.validate()?;
    Ok(respond_alpha_at(y, cfg, cfg.bounds.sample(rng)))
}

/// `(1 - 2α)(y - m)(M - y) + α²(M - m)²/3`.
///
/// With `m = 0` this is the familiar `(1 - 2α) y (M - y) + α² M² / 3`. For
/// `m > 0` the mechanism is the `m = 0` one applied to `(y - m)` on an
/// interval of width `M - m`, so the same expression holds in shifted form;
/// [`Mechanism::moments_by_quadrature`] evaluates the defining integral.
pub fn unit_variance_alpha(y: f64, cfg: &AlphaConfig) -> Result<f64> {
    cfg.validate()?;
    check_in_range(y, &cfg.bounds)?;
    let iv = &cfg.bounds;
    let a = cfg.alpha;
    let w = iv.width();
    Ok((1.0 - 2.0 * a) * (y - iv.lo) * (iv.hi - y) + a * a * w * w / 3.0)
}

// ---------------------------------------------------------------------------
// switching questions

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingConfig {
    pub threshold: f64,
    pub bounds: UniformInterval,
}

impl SwitchingConfig {
    pub fn new(threshold: f64, bounds: UniformInterval) -> Result<Self> {
        let cfg = SwitchingConfig { threshold, bounds };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        if !(self.threshold > self.bounds.lo && self.threshold < self.bounds.hi) {
            return Err(Error::InvalidThreshold {
                threshold: self.threshold,
                lo: self.bounds.lo,
                hi: self.bounds.hi,
            });
        }
        Ok(())
    }

    fn relative_threshold(&self) -> f64 {
        (self.threshold - self.bounds.lo) / self.bounds.width()
    }
}

/// Υ ≤ T asks "at least Υ?", otherwise "smaller than Υ?". The record is
/// `z = 1` (at-least, yes), `z = 0` (at-least no, or smaller-than no) and
/// `z = -1` (smaller-than, yes); `r = (M - m) z + m + M - T`.
pub fn respond_switching_at(y: f64, cfg: &SwitchingConfig, upsilon: f64) -> RandomizedResponse {
    let iv = &cfg.bounds;
    let (question, z) = if upsilon <= cfg.threshold {
        (QuestionTag::AtLeast, if upsilon <= y { 1.0 } else { 0.0 })
    } else {
        (
            QuestionTag::SmallerThan,
            if upsilon <= y { 0.0 } else { -1.0 },
        )
    };
    RandomizedResponse {
        z,
        r: iv.width() * z + iv.lo + iv.hi - cfg.threshold,
        upsilon: None,
        question: Some(question),
    }
}

pub fn respond_switching<R: Rng + ?Sized>(
    rng: &mut R,
    y: f64,
    cfg: &SwitchingConfig,
) -> Result<RandomizedResponse> {
    cfg.validate()?;
    Ok(respond_switching_at(y, cfg, cfg.bounds.sample(rng)))
}

/// Per-unit variance of the switching transform.
///
/// On `(0, M)`: `y(M - y) + (M - T)(2y + T)` for `y <= T`, otherwise
/// `y(M - y) + T(3M - 2y - T)`. For `m > 0` the same expression is applied
/// to `y - m`, `T - m` and `M - m`.
pub fn unit_variance_switching(y: f64, cfg: &SwitchingConfig) -> Result<f64> {
    cfg.validate()?;
    check_in_range(y, &cfg.bounds)?;
    let w = cfg.bounds.width();
    let p = (y - cfg.bounds.lo) / w;
    let t = cfg.relative_threshold();
    let extra = if p <= t {
        (1.0 - t) * (2.0 * p + t)
    } else {
        t * (3.0 - 2.0 * p - t)
    };
    Ok(w * w * (p * (1.0 - p) + extra))
}

/// Probability of a "yes" answer, `1 - |T/M - y/M|`, which is all that is
/// learned when the question asked is not recorded. Two values symmetric
/// around `T` give the same probability, so `y` cannot be recovered.
pub fn expected_z_switching_blind(y: f64, cfg: &SwitchingConfig) -> f64 {
    let w = cfg.bounds.width();
    1.0 - ((cfg.threshold - cfg.bounds.lo) / w - (y - cfg.bounds.lo) / w).abs()
}

// ---------------------------------------------------------------------------
// Eriksson: a true-value card or a mask card

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErikssonDeck {
    /// Share of "true value" cards.
    pub c: f64,
    pub mask_values: Vec<f64>,
    pub mask_probs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErikssonCard {
    TrueValue,
    Mask(usize),
}

impl ErikssonDeck {
    pub fn new(c: f64, mask_values: Vec<f64>, mask_probs: Vec<f64>) -> Result<Self> {
        let deck = ErikssonDeck {
            c,
            mask_values,
            mask_probs,
        };
        deck.validate()?;
        Ok(deck)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::InvalidDeck(format!("C = {} not in (0, 1)", self.c)));
        }
        if self.mask_values.is_empty() || self.mask_values.len() != self.mask_probs.len() {
            return Err(Error::InvalidDeck(
                "mask values and probabilities must be non-empty and equally long".into(),
            ));
        }
        if self.mask_probs.iter().any(|&q| !(q > 0.0))
            || self.mask_values.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidDeck("mask probabilities must be > 0".into()));
        }
        let total: f64 = self.mask_probs.iter().sum();
        if (total - (1.0 - self.c)).abs() > 1e-9 {
            return Err(Error::InvalidDeck(format!(
                "mask probabilities sum to {total}, expected 1 - C = {}",
                1.0 - self.c
            )));
        }
        Ok(())
    }

    /// `Σ q_t x_t`.
    pub fn mask_mean(&self) -> f64 {
        self.mask_values
            .iter()
            .zip(&self.mask_probs)
            .map(|(x, q)| x * q)
            .sum()
    }

    fn mask_second_moment(&self) -> f64 {
        self.mask_values
            .iter()
            .zip(&self.mask_probs)
            .map(|(x, q)| q * x * x)
            .sum()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ErikssonCard {
        let u: f64 = rng.gen();
        if u < self.c {
            return ErikssonCard::TrueValue;
        }
        let mut acc = self.c;
        for (t, q) in self.mask_probs.iter().enumerate() {
            acc += q;
            if u < acc {
                return ErikssonCard::Mask(t);
            }
        }
        ErikssonCard::Mask(self.mask_probs.len() - 1)
    }
}

pub fn respond_eriksson_at(y: f64, deck: &ErikssonDeck, card: ErikssonCard) -> RandomizedResponse {
    let z = match card {
        ErikssonCard::TrueValue => y,
        ErikssonCard::Mask(t) => deck.mask_values[t],
    };
    RandomizedResponse {
        z,
        r: (z - deck.mask_mean()) / deck.c,
        upsilon: None,
        question: None,
    }
}

pub fn respond_eriksson<R: Rng + ?Sized>(
    rng: &mut R,
    y: f64,
    deck: &ErikssonDeck,
) -> Result<RandomizedResponse> {
    deck.validate()?;
    Ok(respond_eriksson_at(y, deck, deck.draw(rng)))
}

/// `[C(1-C)y² + Σ q x² - (Σ q x)² - 2Cy Σ q x] / C²`.
pub fn unit_variance_eriksson(y: f64, deck: &ErikssonDeck) -> Result<f64> {
    deck.validate()?;
    let c = deck.c;
    let a = deck.mask_mean();
    Ok((c * (1.0 - c) * y * y + deck.mask_second_moment() - a * a - 2.0 * c * y * a) / (c * c))
}

// ---------------------------------------------------------------------------
// Chaudhuri: z = a_k y + b_l with two independent decks

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaudhuriDecks {
    pub deck_a: Vec<f64>,
    pub deck_b: Vec<f64>,
}

fn deck_moments(deck: &[f64]) -> (f64, f64) {
    let k = deck.len() as f64;
    let mu = deck.iter().sum::<f64>() / k;
    let var = deck.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / k;
    (mu, var)
}

impl ChaudhuriDecks {
    pub fn new(deck_a: Vec<f64>, deck_b: Vec<f64>) -> Result<Self> {
        let decks = ChaudhuriDecks { deck_a, deck_b };
        decks.validate()?;
        Ok(decks)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, deck) in [("a", &self.deck_a), ("b", &self.deck_b)] {
            if deck.is_empty() || deck.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDeck(format!(
                    "deck {name} is empty or non-finite"
                )));
            }
            let (mu, var) = deck_moments(deck);
            if mu == 0.0 || !(var > 0.0) {
                return Err(Error::InvalidDeck(format!(
                    "deck {name} needs non-zero mean and positive variance (mean {mu}, variance {var})"
                )));
            }
        }
        Ok(())
    }

    pub fn mu_a(&self) -> f64 {
        deck_moments(&self.deck_a).0
    }

    pub fn var_a(&self) -> f64 {
        deck_moments(&self.deck_a).1
    }

    pub fn mu_b(&self) -> f64 {
        deck_moments(&self.deck_b).0
    }

    pub fn var_b(&self) -> f64 {
        deck_moments(&self.deck_b).1
    }
}

pub fn respond_chaudhuri_at(
    y: f64,
    decks: &ChaudhuriDecks,
    card_a: usize,
    card_b: usize,
) -> RandomizedResponse {
    let z = decks.deck_a[card_a] * y + decks.deck_b[card_b];
    RandomizedResponse {
        z,
        r: (z - decks.mu_b()) / decks.mu_a(),
        upsilon: None,
        question: None,
    }
}

pub fn respond_chaudhuri<R: Rng + ?Sized>(
    rng: &mut R,
    y: f64,
    decks: &ChaudhuriDecks,
) -> Result<RandomizedResponse> {
    decks.validate()?;
    let k = rng.gen_range(0..decks.deck_a.len());
    let l = rng.gen_range(0..decks.deck_b.len());
    Ok(respond_chaudhuri_at(y, decks, k, l))
}

/// `y² σ²_a / μ²_a + σ²_b / μ²_a`.
pub fn unit_variance_chaudhuri(y: f64, decks: &ChaudhuriDecks) -> Result<f64> {
    decks.validate()?;
    let mu_a = decks.mu_a();
    Ok((y * y * decks.var_a() + decks.var_b()) / (mu_a * mu_a))
}

// ---------------------------------------------------------------------------
// uniform handle over all schemes

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MechanismKind {
    Basic,
    Complement,
    Alpha,
    Switching,
    Eriksson,
    Chaudhuri,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mechanism {
    Basic(UniformInterval),
    Complement(UniformInterval),
    Alpha(AlphaConfig),
    Switching(SwitchingConfig),
    Eriksson(ErikssonDeck),
    Chaudhuri(ChaudhuriDecks),
}

impl Mechanism {
    pub fn kind(&self) -> MechanismKind {
        match self {
            Mechanism::Basic(_) => MechanismKind::Basic,
            Mechanism::Complement(_) => MechanismKind::Complement,
            Mechanism::Alpha(_) => MechanismKind::Alpha,
            Mechanism::Switching(_) => MechanismKind::Switching,
            Mechanism::Eriksson(_) => MechanismKind::Eriksson,
            Mechanism::Chaudhuri(_) => MechanismKind::Chaudhuri,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Mechanism::Basic(iv) | Mechanism::Complement(iv) => iv.validate(),
            Mechanism::Alpha(cfg) => cfg.validate(),
            Mechanism::Switching(cfg) => cfg.validate(),
            Mechanism::Eriksson(deck) => deck.validate(),
            Mechanism::Chaudhuri(decks) => decks.validate(),
        }
    }

    /// Threshold interval, for the Υ-based schemes.
    pub fn interval(&self) -> Option<&UniformInterval> {
        match self {
            Mechanism::Basic(iv) | Mechanism::Complement(iv) => Some(iv),
            Mechanism::Alpha(cfg) => Some(&cfg.bounds),
            Mechanism::Switching(cfg) => Some(&cfg.bounds),
            Mechanism::Eriksson(_) | Mechanism::Chaudhuri(_) => None,
        }
    }

    /// Response for a pinned threshold. `None` for the card-deck schemes.
    pub fn respond_at(&self, y: f64, upsilon: f64) -> Option<RandomizedResponse> {
        match self {
            Mechanism::Basic(iv) => Some(respond_basic_at(y, iv, upsilon)),
            Mechanism::Complement(iv) => Some(respond_basic_complement_at(y, iv, upsilon)),
            Mechanism::Alpha(cfg) => Some(respond_alpha_at(y, cfg, upsilon)),
            Mechanism::Switching(cfg) => Some(respond_switching_at(y, cfg, upsilon)),
            Mechanism::Eriksson(_) | Mechanism::Chaudhuri(_) => None,
        }
    }

    /// Draws one response. Assumes the mechanism has been validated.
    pub fn respond<R: Rng + ?Sized>(&self, rng: &mut R, y: f64) -> RandomizedResponse {
        match self {
            Mechanism::Eriksson(deck) => respond_eriksson_at(y, deck, deck.draw(rng)),
            Mechanism::Chaudhuri(decks) => {
                let k = rng.gen_range(0..decks.deck_a.len());
                let l = rng.gen_range(0..decks.deck_b.len());
                respond_chaudhuri_at(y, decks, k, l)
            }
            other => {
                let iv = other.interval().expect("threshold mechanism");
                other
                    .respond_at(y, iv.sample(rng))
                    .expect("threshold mechanism")
            }
        }
    }

    /// Exact `E(r)`. Threshold schemes answer deterministically outside
    /// `[m, M]`, so the expectation is `y` clamped into the interval.
    pub fn expected_response(&self, y: f64) -> f64 {
        match self.interval() {
            Some(iv) => iv.clamp(y),
            None => y,
        }
    }

    /// Exact `Var(r)`, using the clamped value for out-of-range `y`.
    pub fn response_variance(&self, y: f64) -> Result<f64> {
        let yc = self.expected_response(y);
        match self {
            Mechanism::Basic(iv) | Mechanism::Complement(iv) => unit_variance_basic(yc, iv),
            Mechanism::Alpha(cfg) => unit_variance_alpha(yc, cfg),
            Mechanism::Switching(cfg) => unit_variance_switching(yc, cfg),
            Mechanism::Eriksson(deck) => unit_variance_eriksson(y, deck),
            Mechanism::Chaudhuri(decks) => unit_variance_chaudhuri(y, decks),
        }
    }

    /// `(E(r), Var(r))` computed from the response function itself: by
    /// quadrature over Υ for threshold schemes, by enumerating the cards for
    /// the deck schemes.
    pub fn moments_by_quadrature(&self, y: f64) -> (f64, f64) {
        match self {
            Mechanism::Eriksson(deck) => {
                let mut outcomes = vec![(
                    deck.c,
                    respond_eriksson_at(y, deck, ErikssonCard::TrueValue).r,
                )];
                outcomes.extend(
                    deck.mask_probs
                        .iter()
                        .enumerate()
                        .map(|(t, &q)| (q, respond_eriksson_at(y, deck, ErikssonCard::Mask(t)).r)),
                );
                weighted_moments(&outcomes)
            }
            Mechanism::Chaudhuri(decks) => {
                let w = 1.0 / (decks.deck_a.len() * decks.deck_b.len()) as f64;
                let outcomes: Vec<(f64, f64)> = (0..decks.deck_a.len())
                    .flat_map(|k| (0..decks.deck_b.len()).map(move |l| (k, l)))
                    .map(|(k, l)| (w, respond_chaudhuri_at(y, decks, k, l).r))
                    .collect();
                weighted_moments(&outcomes)
            }
            other => {
                let iv = *other.interval().expect("threshold mechanism");
                let mut knots = vec![y];
                if let Mechanism::Switching(cfg) = other {
                    knots.push(cfg.threshold);
                }
                let density = 1.0 / iv.width();
                let r = |u: f64| other.respond_at(y, u).expect("threshold mechanism").r;
                let tol = 1e-13 * iv.hi.max(1.0);
                let mean = integrate(|u| r(u) * density, iv.lo, iv.hi, &knots, tol);
                let var = integrate(
                    |u| (r(u) - mean).powi(2) * density,
                    iv.lo,
                    iv.hi,
                    &knots,
                    tol * iv.hi.max(1.0),
                );
                (mean, var)
            }
        }
    }
}

fn weighted_moments(outcomes: &[(f64, f64)]) -> (f64, f64) {
    let mean: f64 = outcomes.iter().map(|(w, r)| w * r).sum();
    let var = outcomes.iter().map(|(w, r)| w * (r - mean).powi(2)).sum();
    (mean, var)
}
