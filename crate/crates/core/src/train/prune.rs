use crate::field::{Group, PatchworkModel};

/// Soft-disables every active term with weight below `threshold` by pinning
/// its weight to `disable_value`. The last active term of a group is kept.
/// Returns the number of newly disabled terms.
pub fn prune_pass(model: &mut PatchworkModel, threshold: f64, disable_value: f64) -> usize {
    let log_thr = threshold.ln();
    let mut remaining = [
        model.active_in_group(Group::Plus),
        model.active_in_group(Group::Minus),
    ];
    let mut disabled = 0;
    for t in model.terms.iter_mut() {
        if !t.active || t.log_weight >= log_thr {
            continue;
        }
        let slot = match t.group {
            Group::Plus => 0,
            Group::Minus => 1,
        };
        if remaining[slot] <= 1 {
            continue;
        }
        remaining[slot] -= 1;
        t.active = false;
        t.log_weight = disable_value.ln();
        disabled += 1;
    }
    disabled
}
