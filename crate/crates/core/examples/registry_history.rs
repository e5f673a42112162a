// The workspace registry: list projects by glob and keep a history of
// settings edits.

use std::error::Error;

use spiderforge::confi::set_option;
use spiderforge::{ProjectSpec, Scaffolder};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let workspace = tempfile::tempdir()?;
    let scaffolder = Scaffolder::new(workspace.path());
    for name in ["shop_eu", "shop_us", "blog"] {
        scaffolder.generate_project(&ProjectSpec::new(name))?;
    }

    let registry = scaffolder.registry();
    let shops = registry.list_projects(Some("shop_*"))?;
    println!("{:?}", shops.iter().map(|e| &e.name).collect::<Vec<_>>());
    assert_eq!(shops.len(), 2);

    let entry = registry.get("shop_eu")?.expect("registered");
    set_option(&entry.settings_path(), "DOWNLOAD_DELAY", "3")?;
    registry.log_config_edit("shop_eu", "DOWNLOAD_DELAY", "3")?;

    let entry = registry.get("shop_eu")?.expect("registered");
    for record in &entry.config_history {
        println!(
            "{} {} = {}",
            record.timestamp.to_rfc3339(),
            record.key,
            record.option
        );
    }
    assert_eq!(entry.config_history.len(), 1);
    println!("registry file: {}", registry.path().display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
