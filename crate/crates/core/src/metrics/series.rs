use serde::{Deserialize, Serialize};

use crate::time::SimTime;

/// One observation of the resource monitor, in VM-slot units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesSample {
    pub t: SimTime,
    pub supply: u64,
    pub demand: u64,
    pub busy: u64,
}

impl SeriesSample {
    pub fn new(t: SimTime, supply: u64, demand: u64, busy: u64) -> Self {
        SeriesSample {
            t,
            supply,
            demand,
            busy,
        }
    }
}

/// Piecewise-constant supply/demand signal. Each sample holds until the next one; the last
/// sample only marks the end of the span.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupplyDemandSeries {
    samples: Vec<SeriesSample>,
}

impl SupplyDemandSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a series from samples, keeping the last one at each repeated timestamp.
    /// Panics if timestamps go backwards.
    pub fn from_samples(samples: impl IntoIterator<Item = SeriesSample>) -> Self {
        let mut s = Self::new();
        for x in samples {
            s.push(x);
        }
        s
    }

    /// Appends a sample; a sample at the same instant as the last one replaces it.
    pub fn push(&mut self, sample: SeriesSample) {
        match self.samples.last_mut() {
            Some(last) if last.t == sample.t => *last = sample,
            Some(last) => {
                assert!(last.t < sample.t, "series sample at {} after {}", sample.t, last.t);
                self.samples.push(sample);
            }
            None => self.samples.push(sample),
        }
    }

    pub fn samples(&self) -> &[SeriesSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> Option<SimTime> {
        self.samples.first().map(|s| s.t)
    }

    pub fn end(&self) -> Option<SimTime> {
        self.samples.last().map(|s| s.t)
    }

    pub fn span(&self) -> SimTime {
        match (self.start(), self.end()) {
            (Some(a), Some(b)) => b - a,
            _ => SimTime::ZERO,
        }
    }

    /// Steps of the step function as (sample, duration in ms).
    pub fn steps(&self) -> impl Iterator<Item = (&SeriesSample, u64)> {
        self.samples
            .windows(2)
            .map(|w| (&w[0], w[1].t.as_millis() - w[0].t.as_millis()))
    }
}
