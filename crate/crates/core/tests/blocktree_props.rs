mod common;

use common::{oracle_blocks, random_source, shape_of};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spiderforge::blocktree::{
    build_block_tree, classify_transition, detect_indent_profile, is_effective, measure_lines,
    BlockNode,
};
use spiderforge::Transition;

fn source(seed: u64) -> Vec<String> {
    random_source(&mut ChaCha8Rng::seed_from_u64(seed), 100, 5).0
}

fn check_node(node: &BlockNode) {
    assert!(
        node.header_index < node.start && node.start <= node.end,
        "{node:?}"
    );
    let mut prev_end = node.start - 1;
    for child in &node.children {
        assert!(child.header_index >= node.start && child.header_index > prev_end);
        assert!(child.start > prev_end && child.end <= node.end);
        assert_eq!(child.depth, node.depth + 1);
        prev_end = child.end;
        check_node(child);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matches_stack_oracle(seed in any::<u64>()) {
        let lines = source(seed);
        let tree = build_block_tree(&lines).unwrap();
        prop_assert_eq!(shape_of(&tree.roots), oracle_blocks(&lines));
    }

    #[test]
    fn spans_nest_properly(seed in any::<u64>()) {
        let lines = source(seed);
        let tree = build_block_tree(&lines).unwrap();
        for root in &tree.roots {
            prop_assert_eq!(root.depth, 0);
            check_node(root);
        }
    }

    #[test]
    fn effective_lines_partition(seed in any::<u64>()) {
        let lines = source(seed);
        let tree = build_block_tree(&lines).unwrap();
        let effective: Vec<usize> = lines
            .iter()
            .enumerate()
            .filter(|(_, l)| is_effective(l))
            .map(|(i, _)| i + 1)
            .collect();
        let mut in_blocks = 0;
        let mut file_scope = 0;
        for &line in &effective {
            // containing blocks form a single chain
            let containing: Vec<&BlockNode> = tree.iter().filter(|b| b.contains(line)).collect();
            for pair in containing.windows(2) {
                prop_assert!(pair[0].start <= pair[1].start && pair[1].end <= pair[0].end);
            }
            match tree.deepest_block_at(line) {
                Some(deepest) => {
                    prop_assert_eq!(deepest.header_index, containing.last().unwrap().header_index);
                    in_blocks += 1;
                }
                None => {
                    prop_assert!(containing.is_empty());
                    file_scope += 1;
                }
            }
        }
        prop_assert_eq!(in_blocks + file_scope, effective.len());
    }

    #[test]
    fn leave_levels_close_every_open_block(seed in any::<u64>()) {
        let lines = source(seed);
        let profile = detect_indent_profile(&lines).unwrap();
        let records = measure_lines(&lines, &profile).unwrap();
        let mut opens = 0;
        let mut closes = 0;
        for r in &records {
            match classify_transition(r.f, r.b) {
                Transition::Enter => opens += 1,
                Transition::Leave(k) => closes += k,
                Transition::Same => {}
            }
        }
        let tree = build_block_tree(&lines).unwrap();
        prop_assert_eq!(opens, tree.block_count());
        // the last effective line always has b = 0, so nothing stays open
        prop_assert_eq!(opens, closes);
    }

    #[test]
    fn parsing_is_deterministic(seed in any::<u64>()) {
        let lines = source(seed);
        let text = lines.join("\n");
        let a = build_block_tree(&spiderforge::blocktree::source_lines(&text)).unwrap();
        let b = build_block_tree(&spiderforge::blocktree::source_lines(&text.clone())).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn transition_sign(f in 0usize..64, b in 0usize..64) {
        let t = classify_transition(f, b);
        let d = f as i64 - b as i64;
        prop_assert_eq!(t == Transition::Enter, d < 0);
        prop_assert_eq!(t == Transition::Same, d == 0);
        prop_assert_eq!(t.levels(), (d > 0).then_some(d as usize));
    }
}
