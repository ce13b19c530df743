//! Deliberate corruptions of a state, used to exercise the checks.

use crate::error::{Error, Result};
use crate::interval::IntervalSet;

use super::ConstructionState;

/// Adds member `member` of level `level - 1` to `G_level`, so that
/// `|G_level ∩ I| = |I| > δ(I)`.
pub fn enlarge_level(state: &mut ConstructionState, level: usize, member: usize) -> Result<()> {
    if level < 2 || level > state.levels.len() {
        return Err(Error::Precondition(format!("no level {level} to enlarge")));
    }
    let iv = state.levels[level - 2]
        .members
        .get(member)
        .ok_or_else(|| Error::Precondition(format!("no member {member} at level {}", level - 1)))?
        .interval
        .clone();
    let lv = &mut state.levels[level - 1];
    lv.g = lv.g.union(&IntervalSet::single(iv));
    Ok(())
}

/// Replaces `ν(I)` by `ν(I) - 1`.
pub fn decrement_nu(state: &mut ConstructionState, level: usize, member: usize) -> Result<()> {
    let m = state
        .levels
        .get_mut(level.wrapping_sub(1))
        .and_then(|l| l.members.get_mut(member))
        .ok_or_else(|| Error::Precondition(format!("no member {member} at level {level}")))?;
    m.nu = m
        .nu
        .pred()
        .ok_or_else(|| Error::Precondition("ν is already zero".into()))?;
    Ok(())
}

/// Replaces `G_level` by `G_{level-1}`.
pub fn fill_level(state: &mut ConstructionState, level: usize) -> Result<()> {
    if level < 2 || level > state.levels.len() {
        return Err(Error::Precondition(format!("no level {level} to fill")));
    }
    state.levels[level - 1].g = state.levels[level - 2].g.clone();
    Ok(())
}
