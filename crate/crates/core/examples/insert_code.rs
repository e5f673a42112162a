// Insert lines into a block, after its last line (back) or just before it
// (front); indentation is copied from that last line.

use std::error::Error;
use std::fs;

use spiderforge::codein::insert_in_block;
use spiderforge::{BlockPath, InsertionRequest, Placement};

const ITEMS: &str = "\
import scrapy


class ProductItem(scrapy.Item):
    url = scrapy.Field()
    title = scrapy.Field()
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let file = dir.path().join("items.py");
    fs::write(&file, ITEMS)?;

    let class = BlockPath::new(["class ProductItem(scrapy.Item):"])?;
    insert_in_block(&InsertionRequest::new(
        &file,
        class.clone(),
        ["price = scrapy.Field()"],
    )?)?;
    insert_in_block(
        &InsertionRequest::new(&file, class, ["sku = scrapy.Field()"])?.placement(Placement::Front),
    )?;

    let text = fs::read_to_string(&file)?;
    print!("{text}");
    assert!(text.ends_with(
        "    title = scrapy.Field()\n    sku = scrapy.Field()\n    price = scrapy.Field()\n"
    ));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
