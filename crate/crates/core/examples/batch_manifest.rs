// Generate several projects from a JSON manifest on worker threads;
// one bad entry does not stop the rest.

use std::error::Error;

use spiderforge::{ProjectSpec, Scaffolder};

const MANIFEST: &str = r#"[
    {"name": "news", "allowed_domains": ["news.example"]},
    {"name": "prices", "spider_name": "offers", "allowed_domains": ["shop.example"],
     "config_overrides": [["CONCURRENT_REQUESTS", "4"]]},
    {"name": "2fast"},
    {"name": "jobs", "start_urls": ["https://jobs.example/list?page=1"]}
]"#;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let workspace = tempfile::tempdir()?;
    let specs: Vec<ProjectSpec> = serde_json::from_str(MANIFEST)?;
    let report = Scaffolder::new(workspace.path()).generate_batch(&specs, 2);
    for outcome in &report.outcomes {
        match &outcome.result {
            Ok(p) => println!("ok {} {}", outcome.name, p.root.display()),
            Err(e) => println!("failed {} {e}", outcome.name),
        }
    }
    println!(
        "{} of {} in {:?}",
        report.succeeded(),
        report.outcomes.len(),
        report.elapsed
    );
    assert_eq!(report.succeeded(), 3);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
