use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{derive_seed, EpisodeConfig, HarnessError};
use crate::belief::init_belief;
use crate::domain::{termination, PartSet, ScenarioSpec, Termination};
use crate::planner::Planner;
use crate::sim::{apply_robot_action, sample_initial_state, sample_observation};
use crate::worker::{apply_worker_move, WorkerMove};

enum Command {
    Move(WorkerMove),
    Quit,
}

fn parse_command(line: &str, spec: &ScenarioSpec) -> Result<Command, String> {
    let mut words = line.split_whitespace();
    let verb = words.next().unwrap_or("");
    let part = |w: Option<&str>| {
        let label = w.ok_or_else(|| format!("`{verb}` needs a part"))?;
        spec.part_by_label(label)
            .ok_or_else(|| format!("unknown part `{label}`"))
    };
    match verb {
        "assemble" | "a" => Ok(Command::Move(WorkerMove::Assemble(part(words.next())?))),
        "remove" | "r" => Ok(Command::Move(WorkerMove::Remove(part(words.next())?))),
        "pause" | "p" => Ok(Command::Move(WorkerMove::Pause)),
        "quit" | "q" => Ok(Command::Quit),
        "" => Err("enter a move: assemble <part> | remove <part> | pause | quit".into()),
        other => Err(format!("unknown command `{other}`")),
    }
}

fn labels(spec: &ScenarioSpec, set: PartSet) -> String {
    let v: Vec<&str> = set.iter().map(|p| spec.label(p)).collect();
    if v.is_empty() {
        "-".into()
    } else {
        v.join(" ")
    }
}

/// Terminal loop where a human plays the worker. Returns the discounted
/// return accumulated until the hotel is finished, the horizon is hit or
/// the user quits.
pub fn interactive_session<R: BufRead, W: Write>(
    spec: &ScenarioSpec,
    cfg: &EpisodeConfig,
    seed: u64,
    input: R,
    mut out: W,
) -> Result<f64, HarnessError> {
    let mut env_rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, 0]));
    let mut belief_rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, 1]));
    let mut plan_rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, 2]));
    let mut truth = sample_initial_state(spec, &mut env_rng);
    let mut belief = init_belief(spec, cfg.particles.max(1), &mut belief_rng);
    let mut planner = Planner::new(cfg.planner, spec);
    let mut lines = input.lines();
    let mut ret = 0.0;
    let mut weight = 1.0;

    writeln!(out, "you are building hotel {}", spec.hotel_types[truth.intent()].name)?;
    'session: while termination(&truth, spec).is_none() {
        let m = belief.marginals(spec).map_err(crate::planner::PlanError::from)?;
        writeln!(out, "\nstep {}", truth.step)?;
        writeln!(out, "  inventory: {}", labels(spec, truth.available))?;
        writeln!(out, "  workspace: {}", labels(spec, truth.assembled))?;
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(" ");
        writeln!(out, "  robot belief P(available): {}", fmt(&m.available))?;
        writeln!(out, "  robot belief P(assembled): {}", fmt(&m.assembled))?;
        writeln!(out, "  robot belief P(type):      {}", fmt(&m.hotel_type))?;

        let action = planner.plan(&belief, spec, &mut plan_rng)?;
        let (post, robot_reward) = apply_robot_action(&truth, action, spec);
        let obs = sample_observation(action, &post, spec, &mut env_rng);
        writeln!(out, "robot: {} -> {}", action.display(spec), obs.display(spec))?;

        let worker = loop {
            write!(out, "worker> ")?;
            out.flush()?;
            let Some(line) = lines.next() else { break 'session };
            match parse_command(&line?, spec) {
                Ok(Command::Quit) => break 'session,
                Ok(Command::Move(mv)) => match apply_worker_move(&post, mv, spec) {
                    Ok(w) => break w,
                    Err(e) => writeln!(out, "illegal move: {e}")?,
                },
                Err(msg) => writeln!(out, "{msg}")?,
            }
        };
        let reward = robot_reward + worker.reward;
        ret += weight * reward;
        weight *= spec.discount;
        truth = worker.next;
        truth.step += 1;
        writeln!(out, "reward {reward:+.2}, discounted return {ret:.3}")?;
        if termination(&truth, spec).is_some() {
            break;
        }
        match belief.update(action, obs, spec, &cfg.belief, &mut belief_rng) {
            Ok(b) => belief = b,
            Err(e) => {
                writeln!(out, "robot lost track: {e}")?;
                break;
            }
        }
        planner.advance(action, obs, spec);
    }
    let status = match termination(&truth, spec) {
        Some(Termination::Completed) => "hotel completed",
        Some(Termination::Horizon) => "horizon reached",
        None => "stopped",
    };
    writeln!(out, "\n{status} after {} steps; discounted return {ret:.3}", truth.step)?;
    Ok(ret)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config;
    use crate::planner::{PlannerConfig, Variant};

    fn session(spec: &ScenarioSpec, script: &str) -> (f64, String) {
        let cfg = EpisodeConfig {
            planner: PlannerConfig::with_variant(Variant::Relevance, 64),
            particles: 300,
            ..Default::default()
        };
        let mut out = Vec::new();
        let ret = interactive_session(spec, &cfg, 1, script.as_bytes(), &mut out).unwrap();
        (ret, String::from_utf8(out).unwrap())
    }

    #[test]
    fn legal_move_advances() {
        let spec = config::demo_six();
        let (_, text) = session(&spec, "assemble red\nquit\n");
        assert!(text.contains("step 1"));
        assert!(text.contains("stopped after 1 steps"));
    }

    #[test]
    fn unavailable_part_is_rejected_then_reprompted() {
        let spec = config::demo_six();
        let (_, text) = session(&spec, "assemble yellow\nassemble red\nquit\n");
        assert!(text.contains("illegal move: `yellow` is not in the inventory"));
        assert!(text.contains("step 1"));
    }

    #[test]
    fn quit_reports_return() {
        let spec = config::demo_six();
        let (ret, text) = session(&spec, "quit\n");
        assert_eq!(ret, 0.0);
        assert!(text.contains("discounted return 0.000"));
        let (ret, text) = session(&spec, "bogus\npause\nq\n");
        assert!(text.contains("unknown command `bogus`"));
        assert!(text.contains(&format!("discounted return {ret:.3}")));
    }
}
