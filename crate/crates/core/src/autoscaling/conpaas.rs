use super::fit::{eval_quadratic, linear_fit, quadratic_fit};
use super::{History, Policy, ScaleCounters, TickContext, Tunables};

/// Members of the forecasting ensemble, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predictor {
    LastValue,
    Linear,
    Quadratic,
    Smoothing,
}

impl Predictor {
    pub const ALL: [Predictor; 4] = [
        Predictor::LastValue,
        Predictor::Linear,
        Predictor::Quadratic,
        Predictor::Smoothing,
    ];

    fn min_points(self) -> usize {
        match self {
            Predictor::LastValue | Predictor::Smoothing => 1,
            Predictor::Linear => 2,
            Predictor::Quadratic => 3,
        }
    }

    /// One-step-ahead forecast from an equally spaced series.
    pub fn forecast(self, ys: &[f64], alpha: f64) -> Option<f64> {
        if ys.len() < self.min_points() {
            return None;
        }
        let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
        let next = ys.len() as f64;
        match self {
            Predictor::LastValue => ys.last().copied(),
            Predictor::Linear => linear_fit(&xs, ys).map(|(a, b)| a + b * next),
            Predictor::Quadratic => quadratic_fit(&xs, ys).map(|c| eval_quadratic(c, next)),
            Predictor::Smoothing => {
                let mut level = ys[0];
                for y in &ys[1..] {
                    level = alpha * y + (1.0 - alpha) * level;
                }
                Some(level)
            }
        }
    }
}

/// Picks the ensemble member with the lowest mean absolute error over the last `depth`
/// one-step backtests and returns its forecast together with the winner.
pub fn conpaas_forecast(ys: &[f64], depth: usize, alpha: f64, counters: &mut ScaleCounters) -> (f64, Predictor) {
    let Some(&last) = ys.last() else {
        return (0.0, Predictor::LastValue);
    };
    // Errors within round-off of each other count as ties.
    let scale = ys.iter().map(|y| y.abs()).sum::<f64>() / ys.len() as f64;
    let tolerance = 1e-9 * scale.max(1.0);
    let mut best: Option<(f64, Predictor)> = None;
    for p in Predictor::ALL {
        let first = ys.len().saturating_sub(depth).max(p.min_points());
        let mut err = 0.0;
        let mut n = 0usize;
        for j in first..ys.len() {
            counters.count_instruction(j as u64 + 1);
            if let Some(pred) = p.forecast(&ys[..j], alpha) {
                err += (pred - ys[j]).abs();
                n += 1;
            }
        }
        if n == 0 {
            continue;
        }
        let mae = err / n as f64;
        if best.is_none_or(|(b, _)| mae < b - tolerance) {
            best = Some((mae, p));
        }
    }
    let winner = best.map_or(Predictor::LastValue, |(_, p)| p);
    counters.count_instruction(ys.len() as u64 + 1);
    let value = winner.forecast(ys, alpha).unwrap_or(last);
    (value, winner)
}

#[derive(Debug, Clone)]
pub struct ConPaaS {
    depth: usize,
    alpha: f64,
    last_winner: Option<Predictor>,
}

impl ConPaaS {
    pub fn new(t: &Tunables) -> Self {
        ConPaaS {
            depth: t.backtest_depth.max(1),
            alpha: t.smoothing_alpha.clamp(0.0, 1.0),
            last_winner: None,
        }
    }

    pub fn last_winner(&self) -> Option<Predictor> {
        self.last_winner
    }
}

impl Policy for ConPaaS {
    fn decide(&mut self, _: &TickContext<'_>, history: &History, counters: &mut ScaleCounters) -> u64 {
        let ys = history.demands();
        let (value, winner) = conpaas_forecast(&ys, self.depth, self.alpha, counters);
        self.last_winner = Some(winner);
        if value.is_finite() {
            value.round().max(0.0) as u64
        } else {
            ys.last().copied().unwrap_or(0.0) as u64
        }
    }

    fn store_size(&self) -> usize {
        // one error score per predictor
        Predictor::ALL.len()
    }
}
