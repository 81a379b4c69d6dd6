//! Incremental left-to-right evaluation.
//!
//! Every operation's value at position `i` depends only on positions
//! `j <= i`, so a prefix can be extended one symbol at a time. Pushing a
//! symbol recomputes only the operations whose value can differ from the
//! previous position: initial ops of the old and new symbol, positional ops,
//! counters whose argument holds, counters with a scheduled window delta,
//! and the transitive dependents of anything that changed. Work is
//! processed level by level so each operation is computed at most once per
//! position, after all of its arguments.

use std::collections::HashMap;

use super::error::EvalError;
use super::eval::check_input;
use super::program::{CountWindow, Op, OpId, Program};
use super::Next;
use crate::symbol::Symbol;

const NONE: u32 = u32::MAX;

/// Flat copy of an operation for the hot loop. Arguments are op indices;
/// `Initial` holds a symbol id from `Compiled::symbol_ids`.
#[derive(Clone, Copy, Debug)]
enum Code {
    Initial(u32),
    One,
    Not(u32),
    And(u32, u32),
    Positional,
    Le(u32, u32),
    CountAll(u32),
    CountLocal,
    Cond(u32, u32, u32),
    Add(u32, u32),
    Sub(u32, u32),
}

/// Dependency structure derived once per program.
#[derive(Debug)]
pub(crate) struct Compiled {
    code: Vec<Code>,
    symbol_ids: HashMap<Symbol, u32>,
    level: Vec<u32>,
    levels: usize,
    pointwise: Csr<u32>,
    all_counts: Csr<u32>,
    local_counts: Csr<(u32, u32)>,
    initial_by_symbol: HashMap<Symbol, Vec<u32>>,
    positional: Vec<u32>,
    /// Dense slot for counting ops, `NONE` elsewhere.
    count_slot: Vec<u32>,
    count_ops: usize,
}

#[derive(Debug)]
struct Csr<T> {
    offsets: Vec<u32>,
    items: Vec<T>,
}

impl<T: Clone> Csr<T> {
    fn build(n: usize, edges: Vec<(u32, T)>) -> Self {
        let mut offsets = vec![0u32; n + 1];
        for (from, _) in &edges {
            offsets[*from as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut items: Vec<Option<T>> = vec![None; edges.len()];
        for (from, item) in edges {
            let slot = &mut fill[from as usize];
            items[*slot as usize] = Some(item);
            *slot += 1;
        }
        Csr { offsets, items: items.into_iter().map(|i| i.expect("filled")).collect() }
    }

    fn get(&self, i: usize) -> &[T] {
        &self.items[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }
}

impl Compiled {
    pub(crate) fn new(p: &Program) -> Self {
        let n = p.ops().len();
        let mut level = vec![0u32; n];
        let mut pointwise = Vec::new();
        let mut all_counts = Vec::new();
        let mut local_counts = Vec::new();
        let mut initial_by_symbol: HashMap<Symbol, Vec<u32>> = HashMap::new();
        let mut positional = Vec::new();
        let mut count_slot = vec![NONE; n];
        let mut count_ops = 0usize;
        let mut code = Vec::with_capacity(n);
        let mut symbol_ids: HashMap<Symbol, u32> = HashMap::new();
        for (i, o) in p.ops().iter().enumerate() {
            let me = i as u32;
            code.push(match &o.op {
                Op::Initial(s) => {
                    let next = symbol_ids.len() as u32;
                    Code::Initial(*symbol_ids.entry(s.clone()).or_insert(next))
                }
                Op::True | Op::One => Code::One,
                Op::Not(x) => Code::Not(x.0),
                Op::And(x, y) => Code::And(x.0, y.0),
                Op::Positional(_) => Code::Positional,
                Op::Le(x, y) => Code::Le(x.0, y.0),
                Op::Count { arg, window: CountWindow::All } => Code::CountAll(arg.0),
                Op::Count { window: CountWindow::Local(_), .. } => Code::CountLocal,
                Op::Cond { test, then, otherwise } => Code::Cond(test.0, then.0, otherwise.0),
                Op::Add(x, y) => Code::Add(x.0, y.0),
                Op::Sub(x, y) => Code::Sub(x.0, y.0),
            });
            let args = o.op.args();
            level[i] = args
                .iter()
                .map(|(a, _)| level.get(a.index()).copied().unwrap_or(0) + 1)
                .max()
                .unwrap_or(0);
            match &o.op {
                Op::Initial(s) => initial_by_symbol.entry(s.clone()).or_default().push(me),
                Op::Positional(_) => positional.push(me),
                Op::Count { arg, window } => {
                    count_slot[i] = count_ops as u32;
                    count_ops += 1;
                    match window {
                        CountWindow::All => all_counts.push((arg.0, me)),
                        CountWindow::Local(psi) => {
                            for &d in &psi.distances {
                                local_counts.push((arg.0, (me, d as u32)));
                            }
                        }
                    }
                }
                _ => {
                    let mut seen: Vec<u32> = Vec::new();
                    for (a, _) in args {
                        if !seen.contains(&a.0) {
                            seen.push(a.0);
                            pointwise.push((a.0, me));
                        }
                    }
                }
            }
        }
        let levels = level.iter().copied().max().map_or(0, |m| m as usize + 1);
        Compiled {
            code,
            symbol_ids,
            level,
            levels,
            pointwise: Csr::build(n, pointwise),
            all_counts: Csr::build(n, all_counts),
            local_counts: Csr::build(n, local_counts),
            initial_by_symbol,
            positional,
            count_slot,
            count_ops,
        }
    }
}

/// Evaluation state after some prefix. Cloning a runner snapshots it.
#[derive(Clone, Debug)]
pub struct Runner<'p> {
    program: &'p Program,
    compiled: &'p Compiled,
    values: Vec<i64>,
    position: usize,
    last: Option<Symbol>,
    symbol_id: u32,
    /// Counters over `[all]` whose argument held at the last position.
    active: Vec<u32>,
    active_index: Vec<u32>,
    /// Window deltas not yet applied, keyed by absolute position.
    pending: HashMap<usize, Vec<(u32, i64)>>,
    delta: Vec<i64>,
    buckets: Vec<Vec<u32>>,
    queued: Vec<bool>,
}

impl<'p> Runner<'p> {
    pub fn new(program: &'p Program) -> Result<Self, EvalError> {
        check_input(program, &[])?;
        let compiled = program.compiled();
        let n = program.ops().len();
        Ok(Runner {
            program,
            compiled,
            values: vec![0; n],
            position: 0,
            last: None,
            symbol_id: NONE,
            active: Vec::new(),
            active_index: vec![NONE; compiled.count_ops],
            pending: HashMap::new(),
            delta: vec![0; compiled.count_ops],
            buckets: vec![Vec::new(); compiled.levels],
            queued: vec![false; n],
        })
    }

    pub fn program(&self) -> &'p Program {
        self.program
    }

    /// Number of symbols consumed so far.
    pub fn len(&self) -> usize {
        self.position
    }

    pub fn is_empty(&self) -> bool {
        self.position == 0
    }

    /// Value of `id` at the last consumed position (0 before any input).
    pub fn value(&self, id: OpId) -> i64 {
        self.values[id.index()]
    }

    pub fn extend(&mut self, input: &[Symbol]) -> Result<(), EvalError> {
        input.iter().try_for_each(|s| self.push(s))
    }

    pub fn push(&mut self, symbol: &Symbol) -> Result<(), EvalError> {
        if !self.program.alphabet().admits(symbol) {
            return Err(EvalError::UnknownSymbol { position: self.position, symbol: symbol.clone() });
        }
        self.symbol_id = self.compiled.symbol_ids.get(symbol).copied().unwrap_or(NONE);
        if self.position == 0 {
            self.first(symbol);
        } else {
            self.step(symbol);
        }
        self.position += 1;
        self.last = Some(symbol.clone());
        Ok(())
    }

    /// The `NEXT` decision at the last consumed position.
    pub fn next(&self) -> Result<Next, EvalError> {
        if self.position == 0 {
            return Ok(Next::Halt);
        }
        let mut hits = self
            .program
            .next_ops()
            .iter()
            .filter(|(_, id)| self.values[id.index()] != 0)
            .map(|(s, _)| s.clone());
        match (hits.next(), hits.next()) {
            (None, _) => Ok(Next::Halt),
            (Some(s), None) => Ok(Next::Token(s)),
            (Some(a), Some(b)) => {
                let mut candidates = vec![a, b];
                candidates.extend(hits);
                Err(EvalError::AmbiguousNext { candidates })
            }
        }
    }

    fn first(&mut self, symbol: &Symbol) {
        let ops = self.program.ops();
        for (i, o) in ops.iter().enumerate() {
            let v = |id: &OpId| self.values[id.index()];
            let value = match &o.op {
                Op::Initial(s) => i64::from(s == symbol),
                Op::True | Op::One => 1,
                Op::Not(x) => i64::from(v(x) == 0),
                Op::And(x, y) => i64::from(v(x) != 0 && v(y) != 0),
                Op::Positional(phi) => i64::from(phi.holds(0)),
                Op::Le(x, y) => i64::from(v(x) <= v(y)),
                Op::Count { arg, window: CountWindow::All } => v(arg),
                Op::Count { arg, window: CountWindow::Local(psi) } => {
                    if psi.distances.contains(&0) {
                        v(arg)
                    } else {
                        0
                    }
                }
                Op::Cond { test, then, otherwise } => {
                    if v(test) != 0 {
                        v(then)
                    } else {
                        v(otherwise)
                    }
                }
                Op::Add(x, y) => v(x) + v(y),
                Op::Sub(x, y) => v(x) - v(y),
            };
            self.values[i] = value;
        }
        // Treat position -1 as all-false for the counters' bookkeeping.
        let compiled = self.compiled;
        for i in 0..ops.len() {
            let value = self.values[i];
            if value == 0 {
                continue;
            }
            for &c in compiled.all_counts.get(i) {
                self.activate(c);
            }
            for &(c, d) in compiled.local_counts.get(i) {
                if d > 0 {
                    self.pending.entry(d as usize).or_default().push((c, value));
                }
            }
        }
    }

    fn enqueue(&mut self, op: u32) {
        let i = op as usize;
        if !self.queued[i] {
            self.queued[i] = true;
            self.buckets[self.compiled.level[i] as usize].push(op);
        }
    }

    fn activate(&mut self, c: u32) {
        let slot = self.compiled.count_slot[c as usize] as usize;
        if self.active_index[slot] == NONE {
            self.active_index[slot] = self.active.len() as u32;
            self.active.push(c);
        }
    }

    fn deactivate(&mut self, c: u32) {
        let slot = self.compiled.count_slot[c as usize] as usize;
        let at = self.active_index[slot];
        if at != NONE {
            self.active_index[slot] = NONE;
            self.active.swap_remove(at as usize);
            if let Some(&moved) = self.active.get(at as usize) {
                let moved_slot = self.compiled.count_slot[moved as usize] as usize;
                self.active_index[moved_slot] = at;
            }
        }
    }

    fn step(&mut self, symbol: &Symbol) {
        let compiled = self.compiled;
        let position = self.position;
        if self.last.as_ref() != Some(symbol) {
            if let Some(last) = self.last.take() {
                for &op in compiled.initial_by_symbol.get(&last).map_or(&[][..], Vec::as_slice) {
                    self.enqueue(op);
                }
            }
            for &op in compiled.initial_by_symbol.get(symbol).map_or(&[][..], Vec::as_slice) {
                self.enqueue(op);
            }
        }
        for &op in &compiled.positional {
            self.enqueue(op);
        }
        for k in 0..self.active.len() {
            let c = self.active[k];
            self.enqueue(c);
        }
        if let Some(events) = self.pending.remove(&position) {
            for (c, d) in events {
                self.delta[compiled.count_slot[c as usize] as usize] += d;
                self.enqueue(c);
            }
        }
        for level in 0..compiled.levels {
            while let Some(op) = self.buckets[level].pop() {
                let i = op as usize;
                self.queued[i] = false;
                let old = self.values[i];
                let new = self.compute(i, position);
                if new != old {
                    self.values[i] = new;
                    self.changed(i, old, new, position);
                }
            }
        }
    }

    fn compute(&mut self, i: usize, position: usize) -> i64 {
        let v = |x: u32| self.values[x as usize];
        match self.compiled.code[i] {
            Code::Initial(id) => i64::from(id == self.symbol_id),
            Code::One => 1,
            Code::Not(x) => i64::from(v(x) == 0),
            Code::And(x, y) => i64::from(v(x) != 0 && v(y) != 0),
            Code::Positional => match &self.program.ops()[i].op {
                Op::Positional(phi) => i64::from(phi.holds(position)),
                _ => unreachable!("code mirrors ops"),
            },
            Code::Le(x, y) => i64::from(v(x) <= v(y)),
            Code::CountAll(arg) => self.values[i] + v(arg),
            Code::CountLocal => {
                let slot = self.compiled.count_slot[i] as usize;
                let d = std::mem::take(&mut self.delta[slot]);
                self.values[i] + d
            }
            Code::Cond(t, a, b) => {
                if v(t) != 0 {
                    v(a)
                } else {
                    v(b)
                }
            }
            Code::Add(x, y) => v(x) + v(y),
            Code::Sub(x, y) => v(x) - v(y),
        }
    }

    fn changed(&mut self, i: usize, old: i64, new: i64, position: usize) {
        let compiled = self.compiled;
        for &d in compiled.pointwise.get(i) {
            self.enqueue(d);
        }
        for &c in compiled.all_counts.get(i) {
            self.enqueue(c);
            if new != 0 {
                self.activate(c);
            } else {
                self.deactivate(c);
            }
        }
        for &(c, d) in compiled.local_counts.get(i) {
            if d == 0 {
                self.delta[compiled.count_slot[c as usize] as usize] += new - old;
                self.enqueue(c);
            } else {
                self.pending.entry(position + d as usize).or_default().push((c, new - old));
            }
        }
    }
}
