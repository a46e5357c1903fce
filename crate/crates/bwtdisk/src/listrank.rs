//! List ranking by pointer doubling, every step a sort plus a merge join.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::extsort::{sort_records, RecordReader, RecordWriter, U64s};
use crate::store::{Blob, Workspace};

/// Marks a missing pointer.
pub const NONE: u64 = u64::MAX;

/// Ranks nodes `[id, next]` along their chains. Returns `[id, head, rank]`
/// sorted by id, where `head` is the chain's first node (the one nothing
/// points to, or `start` when given, whose incoming pointer is ignored so a
/// cycle through it becomes a chain) and `rank` the distance from it.
pub fn list_rank(ws: &Workspace, nodes: &Blob, start: Option<u64>, budget: usize) -> Result<Blob> {
    let by_id = |a: &[u64; 4], b: &[u64; 4]| a[0].cmp(&b[0]);
    let by_first = |a: &[u64; 2], b: &[u64; 2]| a[0].cmp(&b[0]);
    let count = nodes.len() / 16;

    let ids = sort_records(ws, &U64s::<2>, RecordReader::new(&U64s::<2>, nodes)?, budget, by_first)?;
    // [next, id]: the predecessor of `next` is `id`.
    let preds = RecordReader::new(&U64s::<2>, nodes)?.filter(|r| !matches!(r, Ok([_, next]) if *next == NONE || Some(*next) == start));
    let preds = sort_records(ws, &U64s::<2>, preds.map(|r| r.map(|[id, next]| [next, id])), budget, by_first)?;

    // Table rows [id, p, d, h]: p is the node d steps back, or NONE once the
    // head h is known (then d is the rank).
    let table = ws.temp("lr")?;
    {
        let mut w = RecordWriter::new(&U64s::<4>, &table)?;
        let mut pr = RecordReader::new(&U64s::<2>, &preds)?;
        let mut pending = pr.next_rec()?;
        let mut last = None;
        for node in RecordReader::new(&U64s::<2>, &ids)? {
            let [id, _] = node?;
            if last == Some(id) {
                return Err(Error::ListRank(format!("node {id} appears twice")));
            }
            last = Some(id);
            let mut p = NONE;
            while let Some([target, from]) = pending {
                match target.cmp(&id) {
                    Ordering::Less => return Err(Error::ListRank(format!("node {from} points to absent node {target}"))),
                    Ordering::Equal if p != NONE => return Err(Error::ListRank(format!("node {id} has two predecessors"))),
                    Ordering::Equal => p = from,
                    Ordering::Greater => break,
                }
                pending = pr.next_rec()?;
            }
            w.push(&if p == NONE { [id, NONE, 0, id] } else { [id, p, 1, NONE] })?;
        }
        if let Some([target, from]) = pending {
            return Err(Error::ListRank(format!("node {from} points to absent node {target}")));
        }
        w.finish()?;
    }
    drop((ids, preds));

    let mut table = table;
    let max_iters = 66 - count.leading_zeros() as usize;
    for _ in 0..=max_iters {
        let pending = RecordReader::new(&U64s::<4>, &table)?.filter(|r| !matches!(r, Ok(x) if x[1] == NONE));
        let pending = sort_records(ws, &U64s::<4>, pending, budget, |a, b| a[1].cmp(&b[1]))?;
        if pending.is_empty() {
            return Ok(table);
        }
        // Join each pending row with the row of its pointer.
        let updated = ws.temp("lr")?;
        let mut uw = RecordWriter::new(&U64s::<4>, &updated)?;
        let mut look = RecordReader::new(&U64s::<4>, &table)?;
        let mut cur = look.next_rec()?;
        for row in RecordReader::new(&U64s::<4>, &pending)? {
            let [id, p, d, _] = row?;
            while matches!(cur, Some(t) if t[0] < p) {
                cur = look.next_rec()?;
            }
            let target = match cur {
                Some(t) if t[0] == p => t,
                _ => return Err(Error::ListRank(format!("node {id} points to absent node {p}"))),
            };
            let [_, pp, pd, ph] = target;
            uw.push(&if pp == NONE { [id, NONE, d + pd, ph] } else { [id, pp, d + pd, NONE] })?;
        }
        uw.finish()?;
        drop((look, pending));
        let updated_sorted = sort_records(ws, &U64s::<4>, RecordReader::new(&U64s::<4>, &updated)?, budget, by_id)?;
        drop(updated);

        // Resolved rows keep their values; pending rows take the update.
        let next = ws.temp("lr")?;
        {
            let mut w = RecordWriter::new(&U64s::<4>, &next)?;
            let mut u = RecordReader::new(&U64s::<4>, &updated_sorted)?.peekable();
            for row in RecordReader::new(&U64s::<4>, &table)? {
                let row = row?;
                if row[1] == NONE {
                    w.push(&row)?;
                } else {
                    let new = u.next().ok_or_else(|| Error::ListRank("lost a pending node".into()))??;
                    debug_assert_eq!(new[0], row[0]);
                    w.push(&new)?;
                }
            }
            w.finish()?;
        }
        table = next;
    }
    Err(Error::ListRank("pointers form a cycle".into()))
}
