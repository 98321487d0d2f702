use std::collections::{BTreeMap, VecDeque};

use rand::Rng;

use super::{select_target, LatticePos, Position, TraceRecord, TrialConfig, TrialResult};
use crate::channel::LinkState;
use crate::policies::{Arm, Policy};
use crate::{Error, Result};

/// Runs a multiplayer trial from the configured placement and seed.
pub fn run_multiplayer(cfg: &TrialConfig) -> Result<TrialResult> {
    cfg.validate()?;
    let start = cfg.start_positions();
    let mut rngs = cfg.player_rngs();
    simulate_multiplayer(cfg, &start, &mut rngs)
}

/// Group bookkeeping: every player points at its group leader, the lowest
/// id in the group. Only leaders keep a policy; the group moves with the
/// leader's arm and is located at the leader's position.
struct Groups {
    leader_of: Vec<usize>,
}

impl Groups {
    fn leaders(&self) -> Vec<usize> {
        (0..self.leader_of.len()).filter(|&p| self.leader_of[p] == p).collect()
    }

    fn absorb(&mut self, keep: usize, gone: usize) {
        for l in &mut self.leader_of {
            if *l == gone {
                *l = keep;
            }
        }
    }
}

/// Multiplayer loop with explicit start positions and per-player streams.
///
/// Every player advances the shadowing of all its incoming links each turn
/// from its own stream. Each group leader samples the links from the other
/// leaders, keeps a window of the last `avg_window` samples per link and
/// targets the leader with the highest windowed average; its reward is the
/// RSS change on that link. Groups whose leaders come within `meet_radius`
/// merge under the lower id.
pub fn simulate_multiplayer<R: Rng>(cfg: &TrialConfig, start: &[Position], rngs: &mut [R]) -> Result<TrialResult> {
    let n = cfg.num_players;
    if start.len() != n || rngs.len() != n {
        return Err(Error::Contract(format!(
            "{n} players need {n} start positions and streams, got {} and {}",
            start.len(),
            rngs.len()
        )));
    }
    let params = &cfg.channel;
    let delta = params.delta;

    let mut links: Vec<Vec<LinkState>> = (0..n)
        .map(|rx| {
            (0..n)
                .map(|tx| {
                    if tx == rx {
                        LinkState { shadow: 0.0, last_rss: None }
                    } else {
                        LinkState::init(params, &mut rngs[rx])
                    }
                })
                .collect()
        })
        .collect();
    let mut windows: Vec<Vec<VecDeque<f64>>> = vec![vec![VecDeque::with_capacity(cfg.avg_window); n]; n];
    let mut policies: Vec<Option<Policy>> =
        (0..n).map(|p| cfg.policy_for(p).build().map(Some)).collect::<Result<_>>()?;
    let mut groups = Groups { leader_of: (0..n).collect() };
    let mut pos: Vec<LatticePos> = start.iter().map(|p| LatticePos::new(*p)).collect();
    let mut trace = cfg.record_trace.then(Vec::new);

    let merge = |groups: &mut Groups, policies: &mut [Option<Policy>], pos: &[LatticePos]| -> Vec<usize> {
        loop {
            let leaders = groups.leaders();
            let pair = leaders.iter().enumerate().find_map(|(i, &a)| {
                leaders[i + 1..]
                    .iter()
                    .find(|&&b| pos[a].at(delta).distance(&pos[b].at(delta)) <= cfg.meet_radius)
                    .map(|&b| (a, b))
            });
            match pair {
                Some((keep, gone)) => {
                    groups.absorb(keep, gone);
                    policies[gone] = None;
                }
                None => return leaders,
            }
        }
    };

    let mut turns_played = 0;
    let mut group_steps = 0;
    let mut met = false;
    let mut arms = vec![Arm::Up; n];
    for turn in 1..=cfg.max_turns {
        let leaders = merge(&mut groups, &mut policies, &pos);
        if leaders.len() == 1 {
            met = true;
            break;
        }
        let here: Vec<Position> = pos.iter().map(|p| p.at(delta)).collect();

        for (rx, rng) in rngs.iter_mut().enumerate() {
            for tx in (0..n).filter(|&tx| tx != rx) {
                links[rx][tx].advance(params, rng);
            }
        }

        let mut observed: Vec<Option<(f64, Option<f64>)>> = vec![None; n];
        for &l in &leaders {
            let mut averages = BTreeMap::new();
            let mut samples = BTreeMap::new();
            for &m in leaders.iter().filter(|&&m| m != l) {
                let d = cfg.sampling_distance(here[l].distance(&here[m]));
                let (rss, reward) = links[l][m].observe(d, params)?;
                let w = &mut windows[l][m];
                if w.len() == cfg.avg_window {
                    w.pop_front();
                }
                w.push_back(rss);
                averages.insert(m, w.iter().sum::<f64>() / w.len() as f64);
                samples.insert(m, (rss, reward));
            }
            let target = select_target(&averages)?;
            observed[l] = Some(samples[&target]);
        }

        for &l in &leaders {
            let reward = observed[l].and_then(|o| o.1);
            let policy = policies[l].as_mut().expect("leaders keep their policy");
            arms[l] = policy.step(turn, reward, &mut rngs[l])?;
        }

        if let Some(t) = trace.as_mut() {
            for p in 0..n {
                let obs = observed[p];
                t.push(TraceRecord {
                    turn,
                    player: p,
                    x: here[p].x,
                    y: here[p].y,
                    arm: Some(arms[groups.leader_of[p]]),
                    rss: obs.map(|o| o.0),
                    reward: obs.and_then(|o| o.1),
                });
            }
        }

        for p in 0..n {
            pos[p].step(arms[groups.leader_of[p]]);
        }
        group_steps += leaders.len() as u64;
        turns_played = turn;
    }
    if !met {
        met = merge(&mut groups, &mut policies, &pos).len() == 1;
    }

    Ok(TrialResult {
        met,
        turns: turns_played,
        group_steps,
        traversed_distance: group_steps as f64 * delta,
        start_positions: start.to_vec(),
        final_positions: pos.iter().map(|p| p.at(delta)).collect(),
        final_leaders: groups.leader_of,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelParams;
    use crate::engine::{run_two_player, Placement};
    use crate::policies::{PolicyKind, PolicySpec};
    use proptest::prelude::*;

    fn cfg(n: usize, side: f64, kind: PolicyKind, seed: u64, max_turns: u64) -> TrialConfig {
        let channel = ChannelParams::default();
        TrialConfig {
            channel,
            num_players: n,
            area_side: side,
            placement: Placement::Uniform,
            meet_radius: 2.0 * channel.delta,
            max_turns,
            avg_window: 1,
            seed,
            policies: vec![PolicySpec::with_defaults(kind)],
            record_trace: false,
        }
    }

    #[test]
    fn everyone_at_one_point_meets_immediately() {
        let mut c = cfg(5, 10.0, PolicyKind::Greedy, 1, 100);
        c.placement = Placement::Fixed(vec![Position::new(2.0, 3.0); 5]);
        let r = run_multiplayer(&c).unwrap();
        assert!(r.met);
        assert_eq!(r.turns, 0);
        assert_eq!(r.group_steps, 0);
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let c = cfg(3, 10.0, PolicyKind::Greedy, 1, 100);
        let mut rngs = c.player_rngs();
        assert!(simulate_multiplayer(&c, &[Position::default(); 2], &mut rngs).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn two_players_reduce_to_the_two_player_loop(seed in any::<u64>(), kind in 0usize..4) {
            let mut c = cfg(2, 4.0, PolicyKind::ALL[kind], seed, 3000);
            c.record_trace = true;
            let multi = run_multiplayer(&c).unwrap();
            let two = run_two_player(&c).unwrap();
            prop_assert_eq!(multi, two);
        }

        #[test]
        fn groups_move_together(seed in any::<u64>(), n in 3usize..6, kind in 0usize..4) {
            let mut c = cfg(n, 3.0, PolicyKind::ALL[kind], seed, 2000);
            c.avg_window = 4;
            c.record_trace = true;
            let a = run_multiplayer(&c).unwrap();
            prop_assert_eq!(&a, &run_multiplayer(&c).unwrap());
            prop_assert!((a.traversed_distance - a.group_steps as f64 * 0.1).abs() < 1e-9);
            prop_assert!(a.group_steps <= n as u64 * a.turns);
            prop_assert!(a.group_steps >= 2 * a.turns);
            let trace = a.trace.unwrap();
            let at = |turn: u64, p: usize| &trace[(turn as usize - 1) * n + p];
            let last_led = |p: usize| (1..=a.turns).filter(|&t| at(t, p).rss.is_some()).max().unwrap_or(0);
            for p in 0..n {
                let l = a.final_leaders[p];
                prop_assert!(a.final_leaders[l] == l && l <= p);
                if l == p {
                    continue;
                }
                // once the whole final group has formed, members copy the
                // leader's arm and keep their offsets
                let formed = (0..n).filter(|&q| a.final_leaders[q] == l && q != l).map(last_led).max().unwrap() + 1;
                for t in (formed + 1)..=a.turns {
                    prop_assert!(at(t, p).rss.is_none());
                    prop_assert_eq!(at(t, p).arm, at(t, l).arm);
                    let off0 = (at(formed, p).x - at(formed, l).x, at(formed, p).y - at(formed, l).y);
                    let off = (at(t, p).x - at(t, l).x, at(t, p).y - at(t, l).y);
                    prop_assert!((off.0 - off0.0).abs() < 1e-9 && (off.1 - off0.1).abs() < 1e-9);
                }
            }
        }
    }
}
