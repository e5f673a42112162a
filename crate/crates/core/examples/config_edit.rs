// Rewrite settings in place: set, toggle and append keep every other
// byte of the file.

use std::error::Error;

use spiderforge::confi::{apply_edit_text, get_option_text};
use spiderforge::ConfigEdit;

const SETTINGS: &str = "\
BOT_NAME = 'shop'

# Obey robots.txt rules
ROBOTSTXT_OBEY = True

# Configure a delay for requests for the same website (default: 0)
#DOWNLOAD_DELAY = 3

#DEFAULT_REQUEST_HEADERS = {
#    'Accept': 'text/html',
#}
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (text, _) = apply_edit_text(SETTINGS, &ConfigEdit::set("DOWNLOAD_DELAY", "2"))?;
    let (text, _) = apply_edit_text(&text, &ConfigEdit::toggle("ROBOTSTXT_OBEY"))?;
    let (text, _) = apply_edit_text(&text, &ConfigEdit::toggle("DEFAULT_REQUEST_HEADERS"))?;
    let (text, report) = apply_edit_text(
        &text,
        &ConfigEdit::append("FEED_EXPORT_ENCODING", "'utf-8'"),
    )?;
    print!("{text}");
    println!("append: {:?}", report.outcome);

    let delay = get_option_text(&text, "DOWNLOAD_DELAY", "=", "\n")?;
    assert_eq!(delay.option, "2");
    assert!(!delay.commented);
    assert!(text.contains("#ROBOTSTXT_OBEY = True\n"));
    assert!(text.contains("DEFAULT_REQUEST_HEADERS = {\n    'Accept': 'text/html',\n}\n"));

    // setting the same value again changes nothing
    let (again, report) = apply_edit_text(&text, &ConfigEdit::set("DOWNLOAD_DELAY", "2"))?;
    assert!(!report.changed && again == text);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
