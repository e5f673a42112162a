use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use spiderforge::codein::CodeinError;
use spiderforge::confi::{get_option, ConfiError};
use spiderforge::scaffold::{verify_layout, ScaffoldError};
use spiderforge::templates::{ProjectFile, ProjectLayout, TemplateLibrary};
use spiderforge::{ProjectSpec, Scaffolder};

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    walkdir::WalkDir::new(root)
        .into_iter()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            (
                e.path().strip_prefix(root).unwrap().to_path_buf(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn demo_layout_is_complete() {
    let ws = tempfile::tempdir().unwrap();
    let scaffolder = Scaffolder::new(ws.path());
    let project = scaffolder
        .generate_project(&ProjectSpec::new("demo").with_domain("example.com"))
        .unwrap();
    assert_eq!(project.root, ws.path().join("spiders/demo"));
    for rel in [
        "scrapy.cfg",
        "demo/__init__.py",
        "demo/items.py",
        "demo/middlewares.py",
        "demo/pipelines.py",
        "demo/settings.py",
        "demo/spiders/__init__.py",
        "demo/spiders/demo.py",
    ] {
        assert!(project.root.join(rel).is_file(), "{rel}");
    }
    let report = scaffolder.verify_layout(&project.root).unwrap();
    assert!(report.is_complete(), "{report:?}");
    assert!(report.extra.is_empty(), "{report:?}");
    assert_eq!(report.change_once_applied, Some(true));

    let entry = scaffolder.registry().get("demo").unwrap().unwrap();
    assert_eq!(entry.root, project.root);
    assert_eq!(entry.template_set, "default");
    assert!(entry.change_once_applied);

    let spider = fs::read_to_string(&project.spider_path).unwrap();
    assert!(spider.contains("class DemoSpider(scrapy.Spider):"));
    assert!(spider.contains("allowed_domains = ['example.com']"));
    assert!(spider.contains("start_urls = ['https://example.com']"));
    let cfg = fs::read_to_string(project.root.join("scrapy.cfg")).unwrap();
    assert!(cfg.contains("default = demo.settings"));
}

#[test]
fn custom_spider_name() {
    let ws = tempfile::tempdir().unwrap();
    let scaffolder = Scaffolder::new(ws.path());
    let mut spec = ProjectSpec::new("shop");
    spec.spider_name = Some("prices".into());
    let project = scaffolder.generate_project(&spec).unwrap();
    assert!(project.spider_path.ends_with("shop/spiders/prices.py"));
    let report = scaffolder.verify_layout(&project.root).unwrap();
    assert!(
        report.is_complete() && report.extra.is_empty(),
        "{report:?}"
    );
    // without the registry the spider name is unknown
    let bare = verify_layout(&project.root, None).unwrap();
    assert_eq!(bare.missing, vec![PathBuf::from("shop/spiders/shop.py")]);
    assert_eq!(bare.extra, vec![PathBuf::from("shop/spiders/prices.py")]);
    assert_eq!(bare.change_once_applied, None);
}

#[test]
fn verify_layout_reports_missing_and_extra() {
    let ws = tempfile::tempdir().unwrap();
    let scaffolder = Scaffolder::new(ws.path());
    let project = scaffolder
        .generate_project(&ProjectSpec::new("demo"))
        .unwrap();
    fs::remove_file(project.root.join("demo/pipelines.py")).unwrap();
    fs::write(project.root.join("notes.txt"), "x").unwrap();
    let report = scaffolder.verify_layout(&project.root).unwrap();
    assert_eq!(report.missing, vec![PathBuf::from("demo/pipelines.py")]);
    assert_eq!(report.extra, vec![PathBuf::from("notes.txt")]);
    assert!(!report.is_complete());

    let nowhere = scaffolder
        .verify_layout(&ws.path().join("nothing"))
        .unwrap();
    assert_eq!(
        nowhere.missing.len(),
        ProjectLayout::new("x", "nothing", "nothing")
            .expected_entries()
            .len()
    );
}

#[test]
fn duplicate_names_are_refused() {
    let ws = tempfile::tempdir().unwrap();
    let scaffolder = Scaffolder::new(ws.path());
    let first = scaffolder
        .generate_project(&ProjectSpec::new("demo"))
        .unwrap();
    let before = tree(&first.root);
    let err = scaffolder
        .generate_project(&ProjectSpec::new("demo"))
        .unwrap_err();
    assert!(matches!(err, ScaffoldError::AlreadyExists(_)), "{err}");
    // a registered name is taken even in another directory
    let err = scaffolder
        .generate_project(&ProjectSpec::new("demo").with_target_dir("elsewhere"))
        .unwrap_err();
    assert!(matches!(err, ScaffoldError::AlreadyExists(_)), "{err}");
    assert!(!ws.path().join("elsewhere/demo").exists());
    assert_eq!(tree(&first.root), before);
    assert_eq!(scaffolder.registry().load().unwrap().len(), 1);
}

#[test]
fn invalid_names_are_rejected_before_touching_disk() {
    let ws = tempfile::tempdir().unwrap();
    let scaffolder = Scaffolder::new(ws.path());
    for bad in ["9bad", "has-dash", "", "a b"] {
        let err = scaffolder
            .generate_project(&ProjectSpec::new(bad))
            .unwrap_err();
        assert!(matches!(err, ScaffoldError::InvalidSpec(_)), "{bad}: {err}");
    }
    let mut spec = ProjectSpec::new("ok");
    spec.template_set = "missing".into();
    assert!(matches!(
        scaffolder.generate_project(&spec),
        Err(ScaffoldError::TemplateSet(_))
    ));
    assert!(
        !ws.path().join("spiders").exists()
            || fs::read_dir(ws.path().join("spiders"))
                .unwrap()
                .next()
                .is_none()
    );
    assert!(scaffolder.registry().load().unwrap().is_empty());
}

#[test]
fn failed_override_rolls_back() {
    let ws = tempfile::tempdir().unwrap();
    let scaffolder = Scaffolder::new(ws.path());
    let spec = ProjectSpec::new("demo")
        .with_override("DOWNLOAD_DELAY", "2")
        .with_override("ROBOTSTXT_OBEY", "#");
    let err = scaffolder.generate_project(&spec).unwrap_err();
    assert!(
        matches!(err, ScaffoldError::Confi(ConfiError::InvalidOption(_))),
        "{err}"
    );
    assert!(!ws.path().join("spiders/demo").exists());
    assert!(scaffolder.registry().get("demo").unwrap().is_none());
    // the name is free again
    scaffolder
        .generate_project(&ProjectSpec::new("demo"))
        .unwrap();
}

#[test]
fn overrides_apply_in_order() {
    let ws = tempfile::tempdir().unwrap();
    let scaffolder = Scaffolder::new(ws.path());
    let spec = ProjectSpec::new("demo")
        .with_override("DOWNLOAD_DELAY", "2")
        .with_override("ROBOTSTXT_OBEY", "False")
        .with_override("DOWNLOAD_DELAY", "5");
    let project = scaffolder.generate_project(&spec).unwrap();
    let delay = get_option(&project.settings_path, "DOWNLOAD_DELAY").unwrap();
    assert_eq!(delay.option, "5");
    assert!(!delay.commented);
    assert_eq!(
        get_option(&project.settings_path, "ROBOTSTXT_OBEY")
            .unwrap()
            .option,
        "False"
    );
    let history = scaffolder
        .registry()
        .get("demo")
        .unwrap()
        .unwrap()
        .config_history;
    let pairs: Vec<(&str, &str)> = history
        .iter()
        .map(|r| (r.key.as_str(), r.option.as_str()))
        .collect();
    assert_eq!(
        pairs,
        [
            ("DOWNLOAD_DELAY", "2"),
            ("ROBOTSTXT_OBEY", "False"),
            ("DOWNLOAD_DELAY", "5")
        ]
    );
}

#[test]
fn batch_generates_each_project() {
    let ws = tempfile::tempdir().unwrap();
    let scaffolder = Scaffolder::new(ws.path());
    let specs: Vec<ProjectSpec> = ["alpha", "beta", "gamma"]
        .iter()
        .map(|n| ProjectSpec::new(*n).with_domain(format!("{n}.example")))
        .collect();
    let report = scaffolder.generate_batch(&specs, 3);
    assert!(report.all_ok(), "{:?}", report.outcomes);
    let names: Vec<&str> = report.outcomes.iter().map(|o| o.name.as_str()).collect();
    assert_eq!(names, ["alpha", "beta", "gamma"]);
    let mut listed: Vec<String> = scaffolder
        .registry()
        .list_projects(None)
        .unwrap()
        .into_iter()
        .map(|e| e.name)
        .collect();
    listed.sort();
    assert_eq!(listed, ["alpha", "beta", "gamma"]);
    for o in &report.outcomes {
        let root = &o.result.as_ref().unwrap().root;
        assert!(scaffolder.verify_layout(root).unwrap().is_complete());
    }
}

#[test]
fn batch_isolates_failures() {
    let ws = tempfile::tempdir().unwrap();
    let scaffolder = Scaffolder::new(ws.path());
    let specs = vec![
        ProjectSpec::new("one"),
        ProjectSpec::new("one"),
        ProjectSpec::new("2x"),
        ProjectSpec::new("three"),
    ];
    let report = scaffolder.generate_batch(&specs, 2);
    assert_eq!(report.succeeded(), 2);
    assert!(matches!(
        report.outcomes[2].result,
        Err(ScaffoldError::InvalidSpec(_))
    ));
    assert_eq!(
        report
            .outcomes
            .iter()
            .filter(|o| matches!(o.result, Err(ScaffoldError::AlreadyExists(_))))
            .count(),
        1
    );
    assert_eq!(scaffolder.registry().load().unwrap().len(), 2);

    let empty = scaffolder.generate_batch(&[], 4);
    assert!(empty.outcomes.is_empty() && empty.all_ok());
}

#[test]
fn generation_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let spec = ProjectSpec::new("demo")
        .with_domain("example.com")
        .with_override("DOWNLOAD_DELAY", "1");
    let pa = Scaffolder::new(a.path()).generate_project(&spec).unwrap();
    let pb = Scaffolder::new(b.path()).generate_project(&spec).unwrap();
    assert_eq!(tree(&pa.root), tree(&pb.root));
}

#[test]
fn workspace_template_sets_shadow_builtins() {
    let ws = tempfile::tempdir().unwrap();
    let scaffolder = Scaffolder::new(ws.path());
    // copy the built-in set out, then change one file
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("templates/default");
    let dst = ws.path().join("templates/house");
    for e in walkdir::WalkDir::new(&src) {
        let e = e.unwrap();
        let target = dst.join(e.path().strip_prefix(&src).unwrap());
        if e.file_type().is_dir() {
            fs::create_dir_all(&target).unwrap();
        } else {
            fs::copy(e.path(), &target).unwrap();
        }
    }
    let settings = dst.join("skeleton/module/settings.py");
    let text = fs::read_to_string(&settings).unwrap() + "\nHOUSE_STYLE = True\n";
    fs::write(&settings, text).unwrap();

    let mut spec = ProjectSpec::new("demo");
    spec.template_set = "house".into();
    let project = scaffolder.generate_project(&spec).unwrap();
    assert_eq!(
        get_option(&project.settings_path, "HOUSE_STYLE")
            .unwrap()
            .option,
        "True"
    );
    assert_eq!(
        scaffolder
            .registry()
            .get("demo")
            .unwrap()
            .unwrap()
            .template_set,
        "house"
    );

    // an incomplete set is refused up front
    fs::remove_file(dst.join("change_once/items.py")).unwrap();
    let scaffolder = Scaffolder::new(ws.path())
        .with_library(TemplateLibrary::new().with_dir(ws.path().join("templates")));
    let mut spec = ProjectSpec::new("other");
    spec.template_set = "house".into();
    assert!(matches!(
        scaffolder.generate_project(&spec),
        Err(ScaffoldError::TemplateSet(_))
    ));
    assert!(!ws.path().join("spiders/other").exists());
}

#[test]
fn change_once_marker_blocks_reapplication() {
    let ws = tempfile::tempdir().unwrap();
    let scaffolder = Scaffolder::new(ws.path());
    let project = scaffolder
        .generate_project(&ProjectSpec::new("demo"))
        .unwrap();
    let layout = ProjectLayout::new(&project.root, "demo", "demo");
    let set = TemplateLibrary::new().resolve("default").unwrap();
    let before = tree(&project.root);
    let bindings = [("name", "demo")]
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let err =
        spiderforge::codein::apply_change_once_set(&layout, &set, &bindings, scaffolder.registry())
            .unwrap_err();
    assert!(matches!(err, CodeinError::AlreadyApplied(_)));
    assert_eq!(tree(&project.root), before);
    assert!(ProjectFile::CHANGE_ONCE
        .iter()
        .all(|f| layout.path(*f).is_file()));
}

#[test]
fn corrupt_registry_is_left_alone() {
    let ws = tempfile::tempdir().unwrap();
    fs::write(ws.path().join("spiders.json"), "{not json").unwrap();
    let scaffolder = Scaffolder::new(ws.path());
    assert!(scaffolder
        .generate_project(&ProjectSpec::new("demo"))
        .is_err());
    assert_eq!(
        fs::read_to_string(ws.path().join("spiders.json")).unwrap(),
        "{not json"
    );
    assert!(!ws.path().join("spiders/demo").exists());
}
