//! Spike trains and the population-activity readout.
//!
//! A [`SpikeTrain`] is the universal currency between encoders, the
//! simulator, and the plasticity rules: an ordered list of
//! `(neuron, step)` firing events inside a fixed neuron space and horizon.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discrete simulation clock: step size in milliseconds plus the number of
/// steps in one presentation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimClock {
    pub dt_ms: f64,
    pub horizon: usize,
}

impl SimClock {
    pub fn new(dt_ms: f64, horizon: usize) -> Result<Self> {
        if !(dt_ms > 0.0) || !dt_ms.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {dt_ms}")));
        }
        if horizon == 0 {
            return Err(Error::Config("horizon must be at least 1 step".into()));
        }
        Ok(SimClock { dt_ms, horizon })
    }

    /// Wall time in milliseconds at the start of `step`.
    pub fn time_ms(&self, step: usize) -> f64 {
        step as f64 * self.dt_ms
    }
}

/// A single firing event: which neuron, at which step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpikeEvent {
    pub step: usize,
    pub neuron: usize,
}

impl SpikeEvent {
    pub fn new(neuron: usize, step: usize) -> Self {
        SpikeEvent { step, neuron }
    }
}

/// Ordered spike events for one population over one horizon.
///
/// Events are kept sorted by `(step, neuron)` with no duplicate pair; the
/// constructor sorts and deduplicates, and rejects events outside the
/// declared neuron space or horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    population: String,
    neurons: usize,
    horizon: usize,
    events: Vec<SpikeEvent>,
}

impl SpikeTrain {
    /// Empty train over `neurons` channels and `horizon` steps.
    pub fn empty(population: impl Into<String>, neurons: usize, horizon: usize) -> Self {
        SpikeTrain {
            population: population.into(),
            neurons,
            horizon,
            events: Vec::new(),
        }
    }

    pub fn new(
        population: impl Into<String>,
        neurons: usize,
        horizon: usize,
        mut events: Vec<SpikeEvent>,
    ) -> Result<Self> {
        for ev in &events {
            if ev.neuron >= neurons {
                return Err(Error::InvalidInput(format!(
                    "spike event neuron {} outside population of size {}",
                    ev.neuron, neurons
                )));
            }
            if ev.step >= horizon {
                return Err(Error::InvalidInput(format!(
                    "spike event step {} outside horizon {}",
                    ev.step, horizon
                )));
            }
        }
        events.sort_unstable();
        events.dedup();
        Ok(SpikeTrain {
            population: population.into(),
            neurons,
            horizon,
            events,
        })
    }

    pub fn population(&self) -> &str {
        &self.population
    }

    pub fn neurons(&self) -> usize {
        self.neurons
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn events(&self) -> &[SpikeEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events with `step` in `[from, to)`, via binary search on the sort order.
    pub fn events_in(&self, from: usize, to: usize) -> &[SpikeEvent] {
        let lo = self.events.partition_point(|e| e.step < from);
        let hi = self.events.partition_point(|e| e.step < to);
        &self.events[lo..hi]
    }

    /// Neuron indices that fire exactly at `step`, in ascending order.
    pub fn neurons_at(&self, step: usize) -> impl Iterator<Item = usize> + '_ {
        self.events_in(step, step + 1).iter().map(|e| e.neuron)
    }

    /// Firing steps of one neuron, ascending.
    pub fn steps_of(&self, neuron: usize) -> Vec<usize> {
        self.events
            .iter()
            .filter(|e| e.neuron == neuron)
            .map(|e| e.step)
            .collect()
    }

    /// Per-neuron firing-step lists for the whole train, ascending per neuron.
    pub fn steps_by_neuron(&self) -> Vec<Vec<usize>> {
        let mut by_neuron = vec![Vec::new(); self.neurons];
        for ev in &self.events {
            by_neuron[ev.neuron].push(ev.step);
        }
        by_neuron
    }

    /// CSV serialization: header `neuron,step`, one event per row, sorted
    /// by `(step, neuron)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 + self.events.len() * 8);
        out.push_str("neuron,step\n");
        for ev in &self.events {
            let _ = writeln!(out, "{},{}", ev.neuron, ev.step);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn from_csv(
        text: &str,
        population: impl Into<String>,
        neurons: usize,
        horizon: usize,
    ) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "neuron,step" => {}
            Some((_, header)) => {
                return Err(Error::parse(1, format!("expected header `neuron,step`, got `{header}`")))
            }
            None => return Err(Error::parse_nl("empty spike-train CSV")),
        }
        let mut events = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (n, s) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(idx + 1, format!("expected `neuron,step`, got `{line}`")))?;
            let neuron: usize = n
                .trim()
                .parse()
                .map_err(|_| Error::parse(idx + 1, format!("bad neuron index `{n}`")))?;
            let step: usize = s
                .trim()
                .parse()
                .map_err(|_| Error::parse(idx + 1, format!("bad step `{s}`")))?;
            events.push(SpikeEvent::new(neuron, step));
        }
        SpikeTrain::new(population, neurons, horizon, events)
    }

    pub fn read_csv(
        path: impl AsRef<Path>,
        population: impl Into<String>,
        neurons: usize,
        horizon: usize,
    ) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        SpikeTrain::from_csv(&text, population, neurons, horizon)
    }

    /// Dense 0/1 grid: one row per neuron, one column per step.
    pub fn to_grid_csv(&self) -> String {
        let mut grid = vec![0u8; self.neurons * self.horizon];
        for ev in &self.events {
            grid[ev.neuron * self.horizon + ev.step] = 1;
        }
        let mut out = String::with_capacity(self.neurons * (2 * self.horizon + 1));
        for n in 0..self.neurons {
            for s in 0..self.horizon {
                if s > 0 {
                    out.push(',');
                }
                out.push(if grid[n * self.horizon + s] == 1 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

/// Spike count over a window, normalized by population size and window
/// length: the discrete population-activity readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityWindow {
    pub window_len: usize,
    pub n_act: usize,
    pub population_size: usize,
}

impl ActivityWindow {
    pub fn new(window_len: usize, n_act: usize, population_size: usize) -> Result<Self> {
        if population_size == 0 {
            return Err(Error::Domain("activity of an empty population is undefined".into()));
        }
        if window_len == 0 {
            return Err(Error::Domain("activity window must span at least 1 step".into()));
        }
        if n_act > population_size * window_len {
            return Err(Error::Domain(format!(
                "{n_act} spikes cannot fit in {population_size} neurons x {window_len} steps"
            )));
        }
        Ok(ActivityWindow {
            window_len,
            n_act,
            population_size,
        })
    }

    /// Spikes per neuron per step.
    pub fn activity(&self) -> f64 {
        self.n_act as f64 / (self.population_size as f64 * self.window_len as f64)
    }
}

/// Population activity of `train` over `[window_start, window_start + window_len)`:
/// event count divided by `population_size * window_len`.
pub fn measure_activity(
    train: &SpikeTrain,
    population_size: usize,
    window_start: usize,
    window_len: usize,
) -> Result<f64> {
    if population_size == 0 {
        return Err(Error::Domain("activity of an empty population is undefined".into()));
    }
    if window_len == 0 {
        return Err(Error::Domain("activity window must span at least 1 step".into()));
    }
    let end = window_start + window_len;
    if end > train.horizon() {
        return Err(Error::Domain(format!(
            "window [{window_start}, {end}) exceeds horizon {}",
            train.horizon()
        )));
    }
    let n_act = train.events_in(window_start, end).len();
    Ok(ActivityWindow::new(window_len, n_act, population_size)?.activity())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train(neurons: usize, horizon: usize, evs: &[(usize, usize)]) -> SpikeTrain {
        let events = evs.iter().map(|&(n, s)| SpikeEvent::new(n, s)).collect();
        SpikeTrain::new("test", neurons, horizon, events).unwrap()
    }

    #[test]
    fn constructor_sorts_and_dedups() {
        let t = train(4, 10, &[(3, 7), (0, 2), (3, 7), (1, 2)]);
        let got: Vec<(usize, usize)> = t.events().iter().map(|e| (e.neuron, e.step)).collect();
        assert_eq!(got, vec![(0, 2), (1, 2), (3, 7)]);
    }

    #[test]
    fn constructor_rejects_out_of_range() {
        assert!(SpikeTrain::new("t", 2, 10, vec![SpikeEvent::new(2, 0)]).is_err());
        assert!(SpikeTrain::new("t", 2, 10, vec![SpikeEvent::new(0, 10)]).is_err());
    }

    #[test]
    fn clock_validation() {
        assert!(SimClock::new(0.0, 5).is_err());
        assert!(SimClock::new(-1.0, 5).is_err());
        assert!(SimClock::new(1.0, 0).is_err());
        let c = SimClock::new(0.5, 4).unwrap();
        assert_eq!(c.time_ms(3), 1.5);
    }

    #[test]
    fn activity_empty_train_is_zero() {
        let t = SpikeTrain::empty("t", 10, 20);
        assert_eq!(measure_activity(&t, 10, 0, 20).unwrap(), 0.0);
    }

    #[test]
    fn activity_hand_count() {
        // N=10, window 10 steps, 5 events inside -> 5 / (10*10) = 0.05
        let t = train(10, 20, &[(0, 0), (1, 3), (2, 5), (3, 9), (4, 9), (5, 12)]);
        assert_eq!(measure_activity(&t, 10, 0, 10).unwrap(), 0.05);
    }

    #[test]
    fn activity_upper_bound() {
        let t = train(1, 1, &[(0, 0)]);
        assert_eq!(measure_activity(&t, 1, 0, 1).unwrap(), 1.0);
    }

    #[test]
    fn activity_rejects_empty_population_and_bad_window() {
        let t = SpikeTrain::empty("t", 4, 10);
        assert!(matches!(measure_activity(&t, 0, 0, 5), Err(Error::Domain(_))));
        assert!(measure_activity(&t, 4, 5, 6).is_err());
        assert!(measure_activity(&t, 4, 0, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = train(5, 30, &[(4, 0), (0, 3), (2, 3), (1, 29)]);
        let back = SpikeTrain::from_csv(&t.to_csv(), "test", 5, 30).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn csv_rejects_bad_header_and_rows() {
        assert!(SpikeTrain::from_csv("step,neuron\n0,0\n", "t", 2, 2).is_err());
        let err = SpikeTrain::from_csv("neuron,step\nx,0\n", "t", 2, 2).unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(2), .. }));
    }

    #[test]
    fn grid_has_expected_shape() {
        let t = train(2, 3, &[(0, 1), (1, 2)]);
        assert_eq!(t.to_grid_csv(), "0,1,0\n0,0,1\n");
    }

    #[test]
    fn events_in_uses_half_open_window() {
        let t = train(3, 10, &[(0, 2), (1, 4), (2, 6)]);
        let evs = t.events_in(2, 6);
        assert_eq!(evs.len(), 2);
        assert_eq!(evs[0].step, 2);
        assert_eq!(evs[1].step, 4);
    }
}
