// Time throwaway generations next to the recorded interactive timings.

use std::error::Error;

use spiderforge::bench::run_bench;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let result = run_bench(3, true)?;
    print!("{}", result.table());
    assert_eq!(result.scenario(), "Multiple Projects");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
