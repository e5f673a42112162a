// Parse Python source into nested indentation blocks and look one up by
// its header path.

use std::error::Error;

use spiderforge::blocktree::{build_block_tree, detect_indent_profile, locate_block, source_lines};
use spiderforge::BlockPath;

const SOURCE: &str = "\
import scrapy


class ShopSpider(scrapy.Spider):
    name = 'shop'

    def parse(self, response):
        for href in response.css('a::attr(href)'):
            yield response.follow(href)
        # pagination comes later
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let lines = source_lines(SOURCE);
    let profile = detect_indent_profile(&lines)?;
    println!(
        "indent unit: {} {:?}",
        profile.unit_width(),
        profile.style()
    );

    let tree = build_block_tree(&lines)?;
    for block in tree.iter() {
        println!(
            "{}{} lines {}..={}",
            "  ".repeat(block.depth),
            block.header,
            block.start,
            block.end
        );
    }

    let path = BlockPath::new([
        "class ShopSpider(scrapy.Spider):",
        "def parse(self, response):",
    ])?;
    let parse = locate_block(&tree, &path)?;
    assert_eq!((parse.start, parse.end), (8, 9));
    println!("{path} ends at line {}", parse.end);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
