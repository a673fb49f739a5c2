use std::collections::HashSet;

use super::GenNode;

/// Remove object nodes that have no children, repeating until nothing
/// changes.
///
/// Objects of the last generation never got a selection set, and removing
/// them can leave their parent childless in turn. If the root ends up
/// removed the result is empty.
pub fn clean_flat(nodes: &[GenNode]) -> Vec<GenNode> {
    let mut kept: Vec<GenNode> = nodes.to_vec();
    loop {
        let parents: HashSet<u32> = kept.iter().filter_map(|n| n.field_id).collect();
        let removed: HashSet<u32> = kept
            .iter()
            .filter(|n| n.is_object())
            .filter_map(|n| n.object_id)
            .filter(|id| !parents.contains(id))
            .collect();
        if removed.is_empty() {
            break;
        }
        kept.retain(|n| !n.object_id.is_some_and(|id| removed.contains(&id)));
    }
    if kept.iter().any(|n| n.field_id.is_none()) {
        kept
    } else {
        Vec::new()
    }
}
