//! Closed-form layer of the AI development race game.
//!
//! Two strategies compete: always-safe (AS) and always-unsafe (AU). The
//! per-round stage game is averaged over a race of `W` development rounds
//! into a single 2x2 matrix, which is all the population dynamics ever
//! consult. Region boundaries from the well-mixed analysis are exposed both
//! as closed forms (for plot overlays) and through direct comparators.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Unconditional race strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Always complies with safety precautions (AS).
    Safe,
    /// Never complies with safety precautions (AU).
    Unsafe,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::Safe, Strategy::Unsafe];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Strategy::Safe => 0,
            Strategy::Unsafe => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Strategy::Safe => "AS",
            Strategy::Unsafe => "AU",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AS" | "SAFE" => Ok(Strategy::Safe),
            "AU" | "UNSAFE" => Ok(Strategy::Unsafe),
            _ => Err(Error::invalid("strategy", format!("expected AS or AU, got `{s}`"))),
        }
    }
}

/// Scalar constants of the race model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaceParameters {
    /// Safety cost per round (c).
    pub cost: f64,
    /// Intermediate benefit per round (b).
    pub benefit: f64,
    /// Prize for reaching supremacy (B).
    pub prize: f64,
    /// Development rounds needed to reach supremacy (W).
    pub rounds: f64,
    /// Speed multiplier of unsafe development (s).
    pub speed: f64,
    /// Probability an unsafe act is found out (p_fo).
    pub p_found_out: f64,
    /// Disaster probability when the winner was never safe (p_r).
    pub p_disaster: f64,
    /// Selection intensity.
    pub beta: f64,
}

impl Default for RaceParameters {
    /// Early-regime point used throughout the figures: c=1, b=4, B=10^4,
    /// W=100, s=1.5, p_fo=0.5, p_r=0.5, beta=1.
    fn default() -> Self {
        RaceParameters {
            cost: 1.0,
            benefit: 4.0,
            prize: 1e4,
            rounds: 100.0,
            speed: 1.5,
            p_found_out: 0.5,
            p_disaster: 0.5,
            beta: 1.0,
        }
    }
}

impl RaceParameters {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("c", self.cost),
            ("b", self.benefit),
            ("B", self.prize),
            ("W", self.rounds),
            ("s", self.speed),
            ("p_fo", self.p_found_out),
            ("p_r", self.p_disaster),
            ("beta", self.beta),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                return Err(Error::invalid(field, format!("must be finite, got {value}")));
            }
        }
        if self.cost < 0.0 {
            return Err(Error::invalid("c", format!("must be >= 0, got {}", self.cost)));
        }
        if self.benefit <= 0.0 {
            return Err(Error::invalid("b", format!("must be > 0, got {}", self.benefit)));
        }
        if self.prize < 0.0 {
            return Err(Error::invalid("B", format!("must be >= 0, got {}", self.prize)));
        }
        if self.rounds <= 0.0 {
            return Err(Error::invalid("W", format!("must be > 0, got {}", self.rounds)));
        }
        check_speed(self.speed)?;
        check_probability("p_fo", self.p_found_out)?;
        check_probability("p_r", self.p_disaster)?;
        if self.beta < 0.0 {
            return Err(Error::invalid("beta", format!("must be >= 0, got {}", self.beta)));
        }
        Ok(())
    }

    /// The same parameters with the prize removed, i.e. the late-regime
    /// limit B/W -> 0.
    pub fn late_limit(&self) -> RaceParameters {
        RaceParameters { prize: 0.0, ..*self }
    }
}

fn check_speed(speed: f64) -> Result<()> {
    if !(speed >= 1.0) || !speed.is_finite() {
        return Err(Error::invalid("s", format!("must be >= 1, got {speed}")));
    }
    Ok(())
}

fn check_probability(field: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(field, format!("must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Development regime. Supplied by the caller, never inferred from B/W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// B/W >> b.
    Early,
    /// B/W << b.
    Late,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "early" => Ok(Regime::Early),
            "late" => Ok(Regime::Late),
            _ => Err(Error::invalid("regime", format!("expected early or late, got `{s}`"))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Early => "early",
            Regime::Late => "late",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    I,
    II,
    III,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
        })
    }
}

/// A 2x2 payoff matrix for the row player, indexed by strategy
/// (SAFE/AS first, UNSAFE/AU second).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffMatrix2 {
    pub entries: [[f64; 2]; 2],
}

impl PayoffMatrix2 {
    pub fn new(entries: [[f64; 2]; 2]) -> Self {
        PayoffMatrix2 { entries }
    }

    #[inline]
    pub fn get(&self, row: Strategy, col: Strategy) -> f64 {
        self.entries[row.index()][col.index()]
    }

    /// Sum of a row's entries; the quantity compared for risk dominance.
    pub fn row_sum(&self, row: Strategy) -> f64 {
        let r = &self.entries[row.index()];
        r[0] + r[1]
    }
}

/// Per-round stage game between SAFE and UNSAFE developers.
pub fn stage_payoff_matrix(p: &RaceParameters) -> Result<PayoffMatrix2> {
    p.validate()?;
    let (c, b, s, fo) = (p.cost, p.benefit, p.speed, p.p_found_out);
    Ok(PayoffMatrix2::new([
        [-c + b / 2.0, -c + (1.0 - fo) * b / (s + 1.0) + fo * b],
        [(1.0 - fo) * s * b / (s + 1.0), (1.0 - fo * fo) * b / 2.0],
    ]))
}

/// Race payoffs averaged over the development rounds, AS/AU order.
pub fn race_payoff_matrix(p: &RaceParameters) -> Result<PayoffMatrix2> {
    let stage = stage_payoff_matrix(p)?.entries;
    let per_round_prize = p.prize / p.rounds;
    let survive = 1.0 - p.p_disaster;
    Ok(PayoffMatrix2::new([
        [per_round_prize / 2.0 + stage[0][0], stage[0][1]],
        [
            survive * (p.speed * per_round_prize + stage[1][0]),
            survive * (p.speed * per_round_prize / 2.0 + stage[1][1]),
        ],
    ]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CollectivePreference {
    SafePreferred,
    UnsafePreferred,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RiskDominance {
    SafeDominant,
    UnsafeDominant,
    Tie,
}

/// Compares homogeneous welfare: an all-AS population against an all-AU one.
pub fn collective_preference(p: &RaceParameters) -> Result<CollectivePreference> {
    let m = race_payoff_matrix(p)?;
    let safe = m.get(Strategy::Safe, Strategy::Safe);
    let unsafe_ = m.get(Strategy::Unsafe, Strategy::Unsafe);
    Ok(if safe > unsafe_ {
        CollectivePreference::SafePreferred
    } else if safe < unsafe_ {
        CollectivePreference::UnsafePreferred
    } else {
        CollectivePreference::Tie
    })
}

pub fn risk_dominance(p: &RaceParameters) -> Result<RiskDominance> {
    let m = race_payoff_matrix(p)?;
    let safe = m.row_sum(Strategy::Safe);
    let unsafe_ = m.row_sum(Strategy::Unsafe);
    Ok(if safe > unsafe_ {
        RiskDominance::SafeDominant
    } else if safe < unsafe_ {
        RiskDominance::UnsafeDominant
    } else {
        RiskDominance::Tie
    })
}

/// Early-regime dilemma zone `[1 - 1/s, 1 - 1/(3s)]` in p_r.
pub fn early_region_boundaries(speed: f64) -> Result<(f64, f64)> {
    check_speed(speed)?;
    Ok((1.0 - 1.0 / speed, 1.0 - 1.0 / (3.0 * speed)))
}

/// Late-regime p_r above which all-AS beats all-AU in welfare. Not clamped:
/// a negative value means safety is preferred for every p_r.
pub fn late_welfare_boundary(p: &RaceParameters) -> Result<f64> {
    p.validate()?;
    let denom = p.benefit * (1.0 - p.p_found_out * p.p_found_out);
    if denom <= 0.0 {
        return Err(Error::SingularBoundary(
            "late welfare boundary is undefined for p_fo = 1",
        ));
    }
    Ok(1.0 - (p.benefit - 2.0 * p.cost) / denom)
}

/// Late-regime risk-dominance boundary in closed form. Independent of p_fo;
/// it agrees with [`risk_dominance`] in the late limit only at p_fo = 0.
pub fn late_risk_dominance_boundary(p: &RaceParameters) -> Result<f64> {
    p.validate()?;
    let (c, b, s) = (p.cost, p.benefit, p.speed);
    Ok((4.0 * c * (s + 1.0) + 2.0 * b * (s - 1.0)) / (b * (1.0 + 3.0 * s)))
}

/// Assigns the region for `p` under `regime`.
///
/// Early uses the closed-interval dilemma zone, so boundary values land in
/// II. Late evaluates the welfare and risk-dominance comparators directly on
/// the B = 0 limit so that the p_fo dependence is kept; exact ties count in
/// favour of safety.
pub fn classify_region(p: &RaceParameters, regime: Regime) -> Result<Region> {
    p.validate()?;
    match regime {
        Regime::Early => {
            let (lo, hi) = early_region_boundaries(p.speed)?;
            let pr = p.p_disaster;
            Ok(if pr > hi {
                Region::I
            } else if pr >= lo {
                Region::II
            } else {
                Region::III
            })
        }
        Regime::Late => {
            if p.p_found_out >= 1.0 {
                return Err(Error::SingularBoundary(
                    "late regions are undefined for p_fo = 1",
                ));
            }
            let limit = p.late_limit();
            let safe_preferred =
                collective_preference(&limit)? != CollectivePreference::UnsafePreferred;
            let safe_selected = risk_dominance(&limit)? != RiskDominance::UnsafeDominant;
            Ok(match (safe_preferred, safe_selected) {
                (true, true) => Region::I,
                (false, true) => Region::II,
                _ => Region::III,
            })
        }
    }
}
