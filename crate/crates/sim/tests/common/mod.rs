use proptest::strategy::Strategy;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

/// Seeds every property suite runs under.
pub const SEEDS: [u8; 3] = [1, 2, 3];

/// Runs `test` on `cases` draws from `strategy` once per seed in [`SEEDS`].
pub fn check<S>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>)
where
    S: Strategy,
    S::Value: std::fmt::Debug,
{
    for seed in SEEDS {
        let mut bytes = [0u8; 32];
        bytes[0] = seed;
        let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &bytes);
        let config = Config { cases, failure_persistence: None, max_shrink_iters: 0, ..Config::default() };
        let mut runner = TestRunner::new_with_rng(config, rng);
        if let Err(e) = runner.run(&strategy, &test) {
            panic!("seed {seed}: {e}");
        }
    }
}
