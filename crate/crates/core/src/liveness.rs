//! Backward variable liveness and the region liveness derived from it.

use fixedbitset::FixedBitSet;

use crate::dataflow::{solve, Analysis, Direction, FlowResult, NonTermination};
use crate::ir::{Instr, Local, NodeId, Operand, Place, ProjElem, RirFunction, Rvalue};

pub struct Liveness<'a> {
    pub func: &'a RirFunction,
}

/// Locals read by a node, and the local it fully overwrites (if any).
pub fn uses_and_def(instr: &Instr) -> (Vec<Local>, Option<Local>) {
    let mut uses = vec![];
    let op = |o: &Operand, uses: &mut Vec<Local>| {
        if let Some(p) = o.place() {
            uses.push(p.local);
        }
    };
    let write = |p: &Place, uses: &mut Vec<Local>| -> Option<Local> {
        if p.proj.is_empty() {
            Some(p.local)
        } else {
            if p.proj.contains(&ProjElem::Deref) {
                uses.push(p.local);
            }
            None
        }
    };
    let def = match instr {
        Instr::Assign { place, rvalue, .. } => {
            for o in rvalue.operands() {
                op(o, &mut uses);
            }
            if let Rvalue::Ref(_, _, p) = rvalue {
                uses.push(p.local);
            }
            write(place, &mut uses)
        }
        Instr::Call { dest, args, .. } => {
            for o in args {
                op(o, &mut uses);
            }
            write(dest, &mut uses)
        }
        Instr::ConditionalDrop { flag, .. } => {
            uses.push(*flag);
            None
        }
        Instr::If { cond, .. } => {
            op(cond, &mut uses);
            None
        }
        Instr::Switch { place, .. } => {
            uses.push(place.local);
            None
        }
        Instr::Return => {
            uses.push(Local::RETURN);
            None
        }
        Instr::StorageDead { .. } | Instr::Drop { .. } | Instr::Nop { .. } | Instr::Goto { .. } => None,
    };
    (uses, def)
}

impl Analysis for Liveness<'_> {
    type State = FixedBitSet;

    fn direction(&self) -> Direction {
        Direction::Backward
    }

    fn bottom(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.func.locals.len())
    }

    fn boundary(&self) -> FixedBitSet {
        self.bottom()
    }

    fn transfer(&self, n: NodeId, after: &FixedBitSet) -> FixedBitSet {
        let (uses, def) = uses_and_def(&self.func.nodes[n].instr);
        let mut s = after.clone();
        if let Some(d) = def {
            s.set(d.index(), false);
        }
        for u in uses {
            s.insert(u.index());
        }
        s
    }

    fn chain_bound(&self) -> usize {
        self.func.locals.len() + 1
    }
}

/// Live regions before and after every node.
#[derive(Debug, Clone)]
pub struct RegionLiveness {
    pub locals: FlowResult<FixedBitSet>,
    pub before: Vec<FixedBitSet>,
    pub after: Vec<FixedBitSet>,
}

impl RegionLiveness {
    pub fn live_before(&self, n: NodeId, r: crate::ir::Region) -> bool {
        self.before[n].contains(r.0 as usize)
    }
}

pub fn local_liveness(func: &RirFunction) -> Result<FlowResult<FixedBitSet>, NonTermination> {
    solve(func, &Liveness { func })
}

/// Regions mentioned by live locals; universals are live everywhere.
pub fn region_liveness(func: &RirFunction) -> Result<RegionLiveness, NonTermination> {
    let locals = local_liveness(func)?;
    let to_regions = |live: &FixedBitSet| {
        let mut rs = FixedBitSet::with_capacity(func.num_regions as usize);
        rs.insert_range(0..func.sig.universals as usize);
        for l in live.ones() {
            for r in func.locals[l].ty.regions() {
                rs.insert(r.0 as usize);
            }
        }
        rs
    };
    // backward: in = after the node, out = before it
    let after = locals.state_in.iter().map(to_regions).collect();
    let before = locals.state_out.iter().map(to_regions).collect();
    Ok(RegionLiveness { locals, before, after })
}

pub fn fmt_locals(s: &FixedBitSet) -> String {
    let items: Vec<String> = s.ones().map(|l| format!("_{}", l)).collect();
    format!("{{{}}}", items.join(", "))
}

pub fn dump(func: &RirFunction, live: &RegionLiveness) -> String {
    let mut out = String::new();
    for n in 0..func.nodes.len() {
        let regions: Vec<String> = live.before[n].ones().map(|r| format!("'r{}", r)).collect();
        out.push_str(&format!(
            "bb{}: before {} after {} regions {{{}}}\n",
            n,
            fmt_locals(&live.locals.state_out[n]),
            fmt_locals(&live.locals.state_in[n]),
            regions.join(", ")
        ));
    }
    out
}
