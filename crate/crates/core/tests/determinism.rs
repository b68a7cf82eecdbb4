use superrad::harness::{run_ensemble, run_ensemble_with, RunOptions};
use superrad::harness::io::series_csv;
use superrad::model::{Engine, SystemConfig};

fn csv(config: &SystemConfig, engine: Engine, workers: usize) -> String {
    let s = run_ensemble(config, engine, &RunOptions { workers: Some(workers), batch: 7, ..Default::default() }).unwrap();
    series_csv(&s.grid, &[("R", &s.r_of_t), ("P_e", &s.p_e)]).unwrap()
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let mut c = SystemConfig::new(10).with_theta(2.0);
    c.n_trajectories = 45;
    c.n_samples = 61;
    for engine in [Engine::DtwaEliminated, Engine::DtwaFull, Engine::Qsdmf, Engine::QuantumJump] {
        assert_eq!(csv(&c, engine, 1), csv(&c, engine, 4), "{}", engine.name());
    }
}

#[test]
fn records_arrive_in_index_order() {
    let mut c = SystemConfig::new(6);
    c.n_trajectories = 30;
    c.n_samples = 11;
    let mut seen = Vec::new();
    run_ensemble_with(&c, Engine::DtwaEliminated, &RunOptions { workers: Some(3), batch: 4, ..Default::default() }, |r| {
        seen.push(r.index);
        Ok(())
    })
    .unwrap();
    assert_eq!(seen, (0..30).collect::<Vec<u64>>());
}

#[test]
fn seeds_change_results() {
    let mut c = SystemConfig::new(8).with_theta(1.0);
    c.n_trajectories = 20;
    c.n_samples = 21;
    let a = csv(&c, Engine::DtwaEliminated, 1);
    c.master_seed = 1;
    assert_ne!(a, csv(&c, Engine::DtwaEliminated, 1));
}
