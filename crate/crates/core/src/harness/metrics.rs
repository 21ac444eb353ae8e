//! Episode records, run summaries and the reward moving-average series.

use std::fmt::Write as _;

use crate::world::Terminal;

/// Column order of `episodes.csv`.
pub const EPISODES_HEADER: &str =
    "episode,seed,outcome,steps,reward,path_len,min_clearance,max_drift";

/// Moving-average window over the per-episode seed-mean reward.
pub const MA_WINDOW: usize = 50;

/// One finished episode. `wall_time_s` is kept for progress reporting but
/// never serialized, so repeated runs stay byte-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based index within its seed.
    pub episode: usize,
    pub seed: u64,
    pub outcome: Terminal,
    pub steps: usize,
    /// Cumulative unclipped reward.
    pub reward: f64,
    /// Metres flown.
    pub path_len: f64,
    /// Closest approach to any obstacle surface or wall, metres.
    pub min_clearance: f64,
    /// Largest survivor drift seen, metres; zero when the survivor is static.
    pub max_drift: f64,
    pub wall_time_s: f64,
}

impl EpisodeRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.episode,
            self.seed,
            self.outcome,
            self.steps,
            self.reward,
            self.path_len,
            self.min_clearance,
            self.max_drift
        )
    }

    /// Inverse of [`csv_row`]; the wall time is not stored and reads back
    /// as zero.
    pub fn parse_csv_row(line: &str) -> Result<EpisodeRecord, String> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(format!("expected 8 fields, got {}: '{line}'", fields.len()));
        }
        let num = |i: usize| -> Result<f64, String> {
            fields[i]
                .parse()
                .map_err(|_| format!("bad number '{}' in '{line}'", fields[i]))
        };
        let episode: usize = fields[0]
            .parse()
            .map_err(|_| format!("bad episode index '{}'", fields[0]))?;
        if episode == 0 {
            return Err("episode indices are 1-based".into());
        }
        Ok(EpisodeRecord {
            episode,
            seed: fields[1]
                .parse()
                .map_err(|_| format!("bad seed '{}'", fields[1]))?,
            outcome: fields[2].parse().map_err(|e| format!("{e}"))?,
            steps: fields[3]
                .parse()
                .map_err(|_| format!("bad step count '{}'", fields[3]))?,
            reward: num(4)?,
            path_len: num(5)?,
            min_clearance: num(6)?,
            max_drift: num(7)?,
            wall_time_s: 0.0,
        })
    }
}

/// Write a full record set as CSV; empty input yields a header-only file.
pub fn write_episodes_csv<W: std::io::Write>(
    records: &[EpisodeRecord],
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(w, "{EPISODES_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Parse an `episodes.csv` body produced by [`write_episodes_csv`].
pub fn parse_episodes_csv(text: &str) -> Result<Vec<EpisodeRecord>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(EPISODES_HEADER) => {}
        other => return Err(format!("bad header: {other:?}")),
    }
    lines.map(EpisodeRecord::parse_csv_row).collect()
}

/// Success/collision/reward aggregates for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedStats {
    pub seed: u64,
    pub episodes: usize,
    /// Percentage of episodes ending in success.
    pub success_rate: f64,
    /// Percentage ending in collision or out-of-bounds.
    pub collision_rate: f64,
    /// Mean cumulative reward.
    pub avg_reward: f64,
    pub mean_path_len: f64,
}

/// Pooled and per-seed aggregates plus the smoothed reward series.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub episodes: usize,
    pub success_rate: f64,
    pub collision_rate: f64,
    pub avg_reward: f64,
    pub mean_path_len: f64,
    pub per_seed: Vec<SeedStats>,
    /// Moving average (window [`MA_WINDOW`]) over the per-episode seed-mean
    /// reward; empty when there are fewer episodes than the window.
    pub reward_ma: Vec<f64>,
    /// The same series min-max rescaled onto [0, 1]; all zeros for a flat
    /// series.
    pub reward_ma_norm: Vec<f64>,
}

fn aggregate<'a>(records: impl Iterator<Item = &'a EpisodeRecord> + Clone) -> (usize, f64, f64, f64, f64) {
    let n = records.clone().count();
    if n == 0 {
        return (0, 0.0, 0.0, 0.0, 0.0);
    }
    let nf = n as f64;
    let succ = records
        .clone()
        .filter(|r| r.outcome == Terminal::Success)
        .count();
    let coll = records
        .clone()
        .filter(|r| matches!(r.outcome, Terminal::Collision | Terminal::OutOfBounds))
        .count();
    let reward: f64 = records.clone().map(|r| r.reward).sum();
    let path: f64 = records.map(|r| r.path_len).sum();
    (
        n,
        100.0 * succ as f64 / nf,
        100.0 * coll as f64 / nf,
        reward / nf,
        path / nf,
    )
}

/// Aggregate a record set. Seeds appear in the per-seed breakdown in order
/// of first appearance; the reward series averages over seeds per episode
/// index before smoothing.
pub fn summarize(records: &[EpisodeRecord]) -> Summary {
    let (episodes, success_rate, collision_rate, avg_reward, mean_path_len) =
        aggregate(records.iter());

    let mut seeds: Vec<u64> = Vec::new();
    for r in records {
        if !seeds.contains(&r.seed) {
            seeds.push(r.seed);
        }
    }
    let per_seed = seeds
        .iter()
        .map(|&seed| {
            let (n, sr, cr, ar, pl) = aggregate(records.iter().filter(move |r| r.seed == seed));
            SeedStats {
                seed,
                episodes: n,
                success_rate: sr,
                collision_rate: cr,
                avg_reward: ar,
                mean_path_len: pl,
            }
        })
        .collect();

    let max_episode = records.iter().map(|r| r.episode).max().unwrap_or(0);
    let mut sums = vec![0.0; max_episode];
    let mut counts = vec![0usize; max_episode];
    for r in records {
        sums[r.episode - 1] += r.reward;
        counts[r.episode - 1] += 1;
    }
    let seed_mean: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    let reward_ma = moving_average(&seed_mean, MA_WINDOW);
    let reward_ma_norm = min_max_normalize(&reward_ma);

    Summary {
        episodes,
        success_rate,
        collision_rate,
        avg_reward,
        mean_path_len,
        per_seed,
        reward_ma,
        reward_ma_norm,
    }
}

impl Summary {
    /// `summary.txt` body: flat key-value lines mirroring the CSV metrics.
    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "episodes = {}", self.episodes);
        let _ = writeln!(s, "success_rate = {}", self.success_rate);
        let _ = writeln!(s, "collision_rate = {}", self.collision_rate);
        let _ = writeln!(s, "avg_reward = {}", self.avg_reward);
        let _ = writeln!(s, "mean_path_len = {}", self.mean_path_len);
        for st in &self.per_seed {
            let k = st.seed;
            let _ = writeln!(s, "seed.{k}.episodes = {}", st.episodes);
            let _ = writeln!(s, "seed.{k}.success_rate = {}", st.success_rate);
            let _ = writeln!(s, "seed.{k}.collision_rate = {}", st.collision_rate);
            let _ = writeln!(s, "seed.{k}.avg_reward = {}", st.avg_reward);
            let _ = writeln!(s, "seed.{k}.mean_path_len = {}", st.mean_path_len);
        }
        s
    }

    /// `reward_ma.csv` body: the smoothed series indexed by the episode
    /// each window ends on.
    pub fn reward_ma_csv(&self) -> String {
        let mut s = String::from("episode,reward_ma,reward_ma_norm\n");
        for (i, (ma, norm)) in self.reward_ma.iter().zip(&self.reward_ma_norm).enumerate() {
            let _ = writeln!(s, "{},{ma},{norm}", MA_WINDOW + i);
        }
        s
    }
}

/// Sliding-window means; empty when `xs` is shorter than the window. Each
/// window is summed afresh so the result is independent of history.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    assert!(window > 0, "window must be positive");
    if xs.len() < window {
        return Vec::new();
    }
    xs.windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect()
}

/// Rescale onto [0, 1] by the observed range; a flat series maps to zeros.
pub fn min_max_normalize(xs: &[f64]) -> Vec<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in xs {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if !(hi > lo) {
        return vec![0.0; xs.len()];
    }
    xs.iter().map(|&x| (x - lo) / (hi - lo)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(episode: usize, seed: u64, outcome: Terminal, reward: f64) -> EpisodeRecord {
        EpisodeRecord {
            episode,
            seed,
            outcome,
            steps: 10 * episode,
            reward,
            path_len: 5.5 * episode as f64,
            min_clearance: 1.25,
            max_drift: 0.5,
            wall_time_s: 9.9,
        }
    }

    #[test]
    fn csv_rows_round_trip() {
        let r = record(3, 7, Terminal::Success, -12.625);
        let parsed = EpisodeRecord::parse_csv_row(&r.csv_row()).unwrap();
        assert_eq!(parsed.episode, 3);
        assert_eq!(parsed.seed, 7);
        assert_eq!(parsed.outcome, Terminal::Success);
        assert_eq!(parsed.steps, 30);
        assert_eq!(parsed.reward, -12.625);
        assert_eq!(parsed.path_len, 16.5);
        assert_eq!(parsed.min_clearance, 1.25);
        assert_eq!(parsed.max_drift, 0.5);
        assert_eq!(parsed.wall_time_s, 0.0);
    }

    #[test]
    fn empty_record_set_writes_a_header_only_csv() {
        let mut buf = Vec::new();
        write_episodes_csv(&[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, format!("{EPISODES_HEADER}\n"));
        assert_eq!(parse_episodes_csv(&text).unwrap(), vec![]);
    }

    #[test]
    fn parser_rejects_malformed_rows() {
        assert!(parse_episodes_csv("nonsense\n").is_err());
        let bad_row = format!("{EPISODES_HEADER}\n1,2,success,4\n");
        assert!(parse_episodes_csv(&bad_row).is_err());
        let bad_outcome = format!("{EPISODES_HEADER}\n1,2,flew_away,4,0,0,0,0\n");
        assert!(parse_episodes_csv(&bad_outcome).is_err());
    }

    // Append-per-episode means an interrupted run leaves a file cut at a
    // line boundary; every such prefix must stay parseable.
    #[test]
    fn csv_truncated_at_any_line_boundary_still_parses() {
        let records = [
            record(1, 2, Terminal::Timeout, 4.0),
            record(2, 2, Terminal::Collision, -3.0),
            record(3, 2, Terminal::Success, 9.0),
        ];
        let mut buf = Vec::new();
        write_episodes_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut boundary = 0;
        for (kept, line) in text.split_inclusive('\n').enumerate() {
            boundary += line.len();
            let parsed = parse_episodes_csv(&text[..boundary]).unwrap();
            assert_eq!(parsed.len(), kept);
        }
    }

    #[test]
    fn summary_counts_success_and_failure_split_by_seed() {
        let records = vec![
            record(1, 1, Terminal::Success, 10.0),
            record(2, 1, Terminal::Collision, -20.0),
            record(1, 2, Terminal::OutOfBounds, -30.0),
            record(2, 2, Terminal::Timeout, 4.0),
        ];
        let s = summarize(&records);
        assert_eq!(s.episodes, 4);
        assert_eq!(s.success_rate, 25.0);
        assert_eq!(s.collision_rate, 50.0);
        assert_eq!(s.avg_reward, -9.0);
        assert!(s.success_rate + s.collision_rate <= 100.0);
        assert_eq!(s.per_seed.len(), 2);
        assert_eq!(s.per_seed[0].seed, 1);
        assert_eq!(s.per_seed[0].success_rate, 50.0);
        assert_eq!(s.per_seed[1].collision_rate, 50.0);
        // Two episodes < window, so the smoothed series is empty.
        assert!(s.reward_ma.is_empty());
    }

    #[test]
    fn summary_text_is_recomputable_from_the_csv() {
        let records = vec![
            record(1, 1, Terminal::Success, 1.5),
            record(2, 1, Terminal::BatteryDepleted, -3.25),
        ];
        let mut buf = Vec::new();
        write_episodes_csv(&records, &mut buf).unwrap();
        let parsed = parse_episodes_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        let direct = summarize(&records);
        let recomputed = summarize(&parsed);
        assert_eq!(direct.text(), recomputed.text());
    }

    #[test]
    fn moving_average_matches_hand_windows() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(moving_average(&xs, 2), vec![1.5, 2.5, 3.5]);
        assert_eq!(moving_average(&xs, 4), vec![2.5]);
        assert!(moving_average(&xs, 5).is_empty());
        let n = 300;
        let series: Vec<f64> = (0..n).map(|i| i as f64).collect();
        assert_eq!(moving_average(&series, MA_WINDOW).len(), n - MA_WINDOW + 1);
    }

    #[test]
    fn normalization_pins_the_range_to_the_unit_interval() {
        let xs = [2.0, 4.0, 3.0];
        assert_eq!(min_max_normalize(&xs), vec![0.0, 1.0, 0.5]);
        assert_eq!(min_max_normalize(&[7.0, 7.0]), vec![0.0, 0.0]);
        assert!(min_max_normalize(&[]).is_empty());
    }

    #[test]
    fn seed_mean_series_averages_across_seeds_per_episode() {
        // 60 episodes on two seeds with rewards equal to the episode index
        // on one seed and its negation on the other: the seed mean is zero
        // everywhere, so the moving average is identically zero.
        let mut records = Vec::new();
        for ep in 1..=60 {
            records.push(record(ep, 1, Terminal::Timeout, ep as f64));
            records.push(record(ep, 2, Terminal::Timeout, -(ep as f64)));
        }
        let s = summarize(&records);
        assert_eq!(s.reward_ma.len(), 60 - MA_WINDOW + 1);
        assert!(s.reward_ma.iter().all(|&x| x.abs() < 1e-12));
        assert!(s.reward_ma_norm.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn reward_ma_csv_indexes_window_ends() {
        let mut records = Vec::new();
        for ep in 1..=52 {
            records.push(record(ep, 1, Terminal::Timeout, ep as f64));
        }
        let s = summarize(&records);
        let csv = s.reward_ma_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("episode,reward_ma,reward_ma_norm"));
        let first = lines.next().unwrap();
        assert!(first.starts_with("50,"), "{first}");
        assert_eq!(csv.lines().count(), 1 + 3);
    }
}
