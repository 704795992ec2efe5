use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for one trial.
///
/// ChaCha is counter based: the master seed fixes the key and the trial
/// index selects one of 2⁶⁴ non-overlapping streams, so the stream for trial
/// `t` never depends on which worker runs it or on how many trials precede it.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}
