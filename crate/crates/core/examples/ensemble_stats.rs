//! Compares the matcher against the oracle over random planted instances and
//! reports agreement, soundness and the per-position latency profile.
use kedit_stream::cli::{agreement, bench_run};
use kedit_stream::matcher::MatcherConfig;
use kedit_stream::oracle::{oracle_all_positions, DEFAULT_BUDGET};
use rand::{Rng, SeedableRng};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    let k = 3;
    for trial in 0..5 {
        let p: Vec<u32> = (0..1500).map(|_| rng.gen_range(0..4)).collect();
        let mut t: Vec<u32> = (0..4000).map(|_| rng.gen_range(0..4)).collect();
        let mut planted = p.clone();
        for _ in 0..k {
            let i = rng.gen_range(0..planted.len());
            planted[i] = rng.gen_range(0..4);
        }
        t.splice(2000..2000, planted);

        let cfg = MatcherConfig::new((p.len() + t.len()) as u64, k).with_seed(trial);
        let res = bench_run(&cfg, &p, &t)?;
        let truth = oracle_all_positions(&p, &t, DEFAULT_BUDGET)?;
        let reports = kedit_stream::matcher::Ensemble::new(&cfg)?.run(&p, &t)?;
        let (agree, sound) = agreement(&reports, &truth, k);
        let mut lat = res.latencies_ns.clone();
        lat.sort_unstable();
        println!(
            "trial {trial}: agree={agree:.4} sound={sound:.4} p50={}ns max={}ns",
            lat[lat.len() / 2],
            lat[lat.len() - 1]
        );
    }
    Ok(())
}
