// Generate one crawler project with settings overrides, then check its
// layout.

use std::error::Error;
use std::fs;

use spiderforge::confi::get_option;
use spiderforge::{ProjectSpec, Scaffolder};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let workspace = tempfile::tempdir()?;
    let scaffolder = Scaffolder::new(workspace.path());

    let spec = ProjectSpec::new("books")
        .with_domain("books.toscrape.com")
        .with_override("ROBOTSTXT_OBEY", "False")
        .with_override("DOWNLOAD_DELAY", "0.5");
    let project = scaffolder.generate_project(&spec)?;
    println!("generated {} at {}", project.name, project.root.display());

    let report = scaffolder.verify_layout(&project.root)?;
    for entry in walkdir::WalkDir::new(&project.root)
        .min_depth(1)
        .sort_by_file_name()
    {
        let entry = entry?;
        println!("  {}", entry.path().strip_prefix(&project.root)?.display());
    }
    assert!(report.is_complete() && report.extra.is_empty());

    assert_eq!(
        get_option(&project.settings_path, "DOWNLOAD_DELAY")?.option,
        "0.5"
    );
    print!("{}", fs::read_to_string(&project.spider_path)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
