//! Statistical behavior of the agents.

use bailab::adversaries::AdversarySpec;
use bailab::agents::{AgentSpec, PssAgent};
use bailab::engine::{run_protocol, run_trial_traced};
use bailab::schedule::PhaseSchedule;
use bailab::seed::{self, TrialSeeds};
use bailab::{ArmId, BanditInstance};

#[test]
fn pss_pulls_uniformly_within_the_active_set() {
    // phase 1 of PSS(2) on 8 arms: every arm has probability 1/8 per step
    let inst = BanditInstance::new(vec![0.5; 7].into_iter().chain([0.6]).collect()).unwrap();
    let mut counts = [0usize; 8];
    let mut steps = 0;
    for i in 0..40 {
        let out = run_trial_traced(&inst, &AgentSpec::Pss { u: 2.0 }, &AdversarySpec::Noop, 3000, 0.0, TrialSeeds::derive(9, i), true)
            .unwrap();
        for r in &out.rounds[..1000] {
            counts[r.pulled.unwrap().index()] += 1;
            steps += 1;
        }
    }
    let p = 1.0 / 8.0;
    let sigma = (p * (1.0 - p) / steps as f64).sqrt();
    for c in counts {
        let f = c as f64 / steps as f64;
        assert!((f - p).abs() < 4.0 * sigma, "{counts:?}");
    }
}

#[test]
fn pss_active_sets_shrink_on_schedule() {
    let inst = BanditInstance::two_group(32, 0.9, 0.1).unwrap();
    for u in [2.0, 3.0, 5.5, 32.0] {
        let schedule = PhaseSchedule::pss(32, 5000, u).unwrap();
        let mut agent = PssAgent::new(schedule.clone(), seed::stream(4));
        let mut adversary = bailab::adversaries::NoopAdversary;
        run_protocol(&inst, &mut agent, &mut adversary, 5000, 0.0, 4, false).unwrap();
        let sizes: Vec<usize> = agent.phase_log().iter().map(|r| r.kept.len()).collect();
        assert_eq!(sizes, schedule.active_sizes()[1..].to_vec(), "u = {u}");
        assert_eq!(agent.active().len(), 1);
        // survivors are always drawn from the previous active set
        for pair in agent.phase_log().windows(2) {
            assert_eq!(pair[0].kept, pair[1].active);
        }
    }
}

#[test]
fn easy_instances_are_solved_by_everyone() {
    let inst = BanditInstance::new(vec![0.2, 0.95, 0.3, 0.1, 0.25]).unwrap();
    for agent in [AgentSpec::Pss { u: 2.0 }, AgentSpec::Pss { u: 5.0 }, AgentSpec::Sh, AgentSpec::Up] {
        for i in 0..20 {
            let out = run_trial_traced(&inst, &agent, &AdversarySpec::Noop, 2000, 0.0, TrialSeeds::derive(1, i), false).unwrap();
            assert_eq!(out.result.output, ArmId(1), "{agent}");
        }
    }
}

#[test]
fn realized_pulls_match_the_schedules() {
    let inst = BanditInstance::two_group(8, 0.6, 0.2).unwrap();
    let sh = run_trial_traced(&inst, &AgentSpec::Sh, &AdversarySpec::Noop, 240, 0.0, TrialSeeds::derive(2, 0), false).unwrap();
    // τ = [10, 20, 40]
    let per_phase: Vec<u32> = sh.result.phase_pulls.iter().map(|p| p.iter().sum()).collect();
    assert_eq!(per_phase, vec![80, 80, 80]);
    assert!(sh.result.phase_pulls[0].iter().all(|&n| n == 10));

    let up = run_trial_traced(&inst, &AgentSpec::Up, &AdversarySpec::Noop, 250, 0.0, TrialSeeds::derive(2, 0), false).unwrap();
    assert_eq!(up.result.phase_pulls, vec![vec![31; 8]]);
    assert_eq!(up.result.steps_used, 248);

    let pss = run_trial_traced(&inst, &AgentSpec::Pss { u: 2.0 }, &AdversarySpec::Noop, 250, 0.0, TrialSeeds::derive(2, 0), false)
        .unwrap();
    assert_eq!(pss.result.steps_used, 249);
    assert!(pss.result.phase_pulls.iter().all(|p| p.iter().sum::<u32>() == 83));
}
