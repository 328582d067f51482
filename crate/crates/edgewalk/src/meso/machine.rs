use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meso::board::{edge_key, EdgeState, EdgeStateBoard, PathGamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ThetaValue {
    Zero,
    One,
    Star,
}

impl ThetaValue {
    pub fn from_bool(b: bool) -> Self {
        if b {
            ThetaValue::One
        } else {
            ThetaValue::Zero
        }
    }

    pub fn as_char(self) -> char {
        match self {
            ThetaValue::Zero => '0',
            ThetaValue::One => '1',
            ThetaValue::Star => '*',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ThetaType {
    A,
    APrime,
    B,
    BPrime,
    C,
    D,
}

impl ThetaType {
    /// Types whose value 1 certifies a long mesoscopic step.
    pub fn is_good(self) -> bool {
        matches!(self, ThetaType::A | ThetaType::B | ThetaType::C | ThetaType::D)
    }
}

/// `Theta_0..Theta_{K-1}` with their type tags (`None` for `*`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaSequence {
    pub values: Vec<ThetaValue>,
    pub types: Vec<Option<ThetaType>>,
}

impl ThetaSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl fmt::Display for ThetaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.values {
            write!(f, "{}", v.as_char())?;
        }
        Ok(())
    }
}

/// Where a usable or usable-clean edge got its state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grant {
    pub since: usize,
    pub clean: bool,
}

/// One Theta value the machine needs: its index, type, the direction of the
/// stage's first step, and the edge whose window events decide it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaQuery {
    pub index: usize,
    pub ty: ThetaType,
    pub dir: i64,
    pub edge: i64,
    pub grant: Option<Grant>,
}

/// Supplies the boolean outcome of each consulted event. `None` means the
/// outcome is not available.
pub trait OutcomeSource {
    fn outcome(&mut self, query: &ThetaQuery) -> Option<bool>;
}

impl<F: FnMut(&ThetaQuery) -> Option<bool>> OutcomeSource for F {
    fn outcome(&mut self, query: &ThetaQuery) -> Option<bool> {
        self(query)
    }
}

/// Answers queries in order from a fixed list.
#[derive(Debug, Clone, Default)]
pub struct ScriptedOutcomes {
    answers: Vec<bool>,
    used: usize,
}

impl ScriptedOutcomes {
    pub fn new(answers: Vec<bool>) -> Self {
        Self { answers, used: 0 }
    }

    pub fn used(&self) -> usize {
        self.used
    }
}

impl OutcomeSource for ScriptedOutcomes {
    fn outcome(&mut self, _: &ThetaQuery) -> Option<bool> {
        let a = self.answers.get(self.used).copied();
        if a.is_some() {
            self.used += 1;
        }
        a
    }
}

/// Forwards to another source and keeps every query with its answer.
#[derive(Debug, Clone)]
pub struct Recording<S> {
    pub inner: S,
    pub log: Vec<(ThetaQuery, bool)>,
}

impl<S> Recording<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, log: Vec::new() }
    }

    /// A source that reproduces the recorded answers.
    pub fn replay(&self) -> ScriptedOutcomes {
        ScriptedOutcomes::new(self.log.iter().map(|(_, a)| *a).collect())
    }
}

impl<S: OutcomeSource> OutcomeSource for Recording<S> {
    fn outcome(&mut self, query: &ThetaQuery) -> Option<bool> {
        let a = self.inner.outcome(query)?;
        self.log.push((*query, a));
        Some(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageCase {
    Clean,
    Usable,
    UsableClean,
    DirtyUTurn,
    DirtyAheadDirty,
    DirtyAheadClean,
    DirtyAheadUsable,
    DirtyAheadUsableClean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaAssignment {
    pub index: usize,
    pub value: ThetaValue,
    pub ty: Option<ThetaType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub start: usize,
    pub steps: usize,
    pub case: StageCase,
    pub with_wait: bool,
    pub dirty: bool,
    pub dirty_before: usize,
    pub dirty_after: usize,
}

impl StageRecord {
    pub fn dirty_change(&self) -> i64 {
        self.dirty_after as i64 - self.dirty_before as i64
    }

    /// At most +3 dirty edges without wait, exactly -1 for a dirty stage with
    /// wait, unchanged for a non-dirty stage with wait.
    pub fn accounting_holds(&self) -> bool {
        let d = self.dirty_change();
        match (self.with_wait, self.dirty) {
            (false, _) => d <= 3,
            (true, true) => d == -1,
            (true, false) => d == 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageOutput {
    pub assignments: Vec<ThetaAssignment>,
    pub record: StageRecord,
}

fn ask(source: &mut dyn OutcomeSource, query: ThetaQuery) -> Result<bool> {
    source
        .outcome(&query)
        .ok_or_else(|| Error::Contract(format!("no outcome supplied for Theta_{} ({:?})", query.index, query.ty)))
}

fn grant_of(state: EdgeState) -> Option<Grant> {
    match state {
        EdgeState::Usable { since } => Some(Grant { since, clean: false }),
        EdgeState::UsableClean { since } => Some(Grant { since, clean: true }),
        _ => None,
    }
}

fn usable_type(g: Grant) -> ThetaType {
    if g.clean {
        ThetaType::B
    } else {
        ThetaType::A
    }
}

/// Runs the stage that starts at step `k`, updating `board`. Leftward steps
/// use the same rules with the lattice mirrored.
pub fn advance_stage(
    board: &mut EdgeStateBoard,
    path: &PathGamma,
    k: usize,
    source: &mut dyn OutcomeSource,
) -> Result<StageOutput> {
    let big_k = path.len();
    if k != board.next_stage() {
        return Err(Error::Contract(format!("step {k} does not start a stage (next is {})", board.next_stage())));
    }
    if k >= big_k || (k > 0 && k + 2 > big_k) {
        return Err(Error::Contract(format!("no stage starts at step {k} of a length-{big_k} path")));
    }
    let d = path.step(k);
    let zk = path.z(k);
    let z1 = path.z(k + 1);
    let e0 = edge_key(zk, z1);
    let behind = edge_key(zk, zk - d);
    let dirty_before = board.dirty_count();
    let mut out = Vec::with_capacity(2);
    let mut assign = |index, value, ty| out.push(ThetaAssignment { index, value, ty });
    let mut with_wait = false;
    let mut dirty = false;
    let query = |index, ty, edge, grant| ThetaQuery {
        index,
        ty,
        dir: d,
        edge,
        grant,
    };

    let (case, steps) = match board.state(e0) {
        EdgeState::Clean => {
            let v = ask(source, query(k, ThetaType::C, e0, None))?;
            assign(k, ThetaValue::from_bool(v), Some(ThetaType::C));
            board.set(e0, EdgeState::Dirty);
            board.set(behind, EdgeState::Dirty);
            (StageCase::Clean, 1)
        }
        s @ (EdgeState::Usable { .. } | EdgeState::UsableClean { .. }) => {
            let g = grant_of(s).unwrap();
            let ty = usable_type(g);
            let v = ask(source, query(k, ty, e0, Some(g)))?;
            assign(k, ThetaValue::from_bool(v), Some(ty));
            board.set(e0, EdgeState::Dirty);
            board.set(behind, EdgeState::Dirty);
            let case = if g.clean { StageCase::UsableClean } else { StageCase::Usable };
            (case, 1)
        }
        EdgeState::Dirty => {
            let z2 = path.z(k + 2);
            if z2 == zk {
                assign(k, ThetaValue::Star, None);
                let v = ask(source, query(k + 1, ThetaType::D, e0, None))?;
                assign(k + 1, ThetaValue::from_bool(v), Some(ThetaType::D));
                for e in [e0 - 1, e0, e0 + 1] {
                    board.set(e, EdgeState::Dirty);
                }
                (StageCase::DirtyUTurn, 2)
            } else {
                let e1 = edge_key(z1, z2);
                let ahead = board.state(e1);
                let behind_state = board.state(behind);
                if ahead == EdgeState::Dirty {
                    assign(k, ThetaValue::Star, None);
                    let v = ask(source, query(k + 1, ThetaType::APrime, e0, None))?;
                    assign(k + 1, ThetaValue::from_bool(v), Some(ThetaType::APrime));
                    board.set(behind, EdgeState::Dirty);
                    board.set(e1, EdgeState::Dirty);
                    if v {
                        with_wait = true;
                        dirty = behind_state == EdgeState::Dirty;
                        board.set(e0, EdgeState::Usable { since: k + 2 });
                    }
                    (StageCase::DirtyAheadDirty, 2)
                } else {
                    if behind_state == EdgeState::Clean {
                        let v = ask(source, query(k, ThetaType::BPrime, behind, None))?;
                        assign(k, ThetaValue::from_bool(v), Some(ThetaType::BPrime));
                        let s = if v {
                            EdgeState::UsableClean { since: k + 2 }
                        } else {
                            EdgeState::Dirty
                        };
                        board.set(behind, s);
                    } else {
                        assign(k, ThetaValue::Star, None);
                        board.set(behind, EdgeState::Dirty);
                    }
                    let case = match grant_of(ahead) {
                        None => {
                            let v = ask(source, query(k + 1, ThetaType::C, e1, None))?;
                            assign(k + 1, ThetaValue::from_bool(v), Some(ThetaType::C));
                            StageCase::DirtyAheadClean
                        }
                        Some(g) => {
                            let ty = usable_type(g);
                            let v = ask(source, query(k + 1, ty, e1, Some(g)))?;
                            assign(k + 1, ThetaValue::from_bool(v), Some(ty));
                            board.set(e0, EdgeState::Dirty);
                            if g.clean {
                                StageCase::DirtyAheadUsableClean
                            } else {
                                StageCase::DirtyAheadUsable
                            }
                        }
                    };
                    board.set(e1, EdgeState::Dirty);
                    (case, 2)
                }
            }
        }
    };
    board.finish_stage(k + steps);
    Ok(StageOutput {
        assignments: out,
        record: StageRecord {
            start: k,
            steps,
            case,
            with_wait,
            dirty,
            dirty_before,
            dirty_after: board.dirty_count(),
        },
    })
}

/// The machine between stages; cloning it forks the run.
#[derive(Debug, Clone)]
pub struct StateMachine {
    path: PathGamma,
    board: EdgeStateBoard,
    values: Vec<Option<(ThetaValue, Option<ThetaType>)>>,
    stages: Vec<StageRecord>,
}

/// Result of running the machine over a whole path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineRun {
    pub theta: ThetaSequence,
    pub stages: Vec<StageRecord>,
    pub board: EdgeStateBoard,
}

impl StateMachine {
    pub fn new(path: PathGamma) -> Self {
        let k = path.len();
        Self {
            path,
            board: EdgeStateBoard::new(),
            values: vec![None; k],
            stages: Vec::new(),
        }
    }

    pub fn board(&self) -> &EdgeStateBoard {
        &self.board
    }

    /// No further stage can start.
    pub fn is_finished(&self) -> bool {
        let k = self.board.next_stage();
        let big_k = self.path.len();
        k >= big_k || (k > 0 && k + 2 > big_k)
    }

    pub fn advance(&mut self, source: &mut dyn OutcomeSource) -> Result<&StageRecord> {
        let k = self.board.next_stage();
        let out = advance_stage(&mut self.board, &self.path, k, source)?;
        for a in out.assignments {
            self.values[a.index] = Some((a.value, a.ty));
        }
        self.stages.push(out.record);
        Ok(self.stages.last().unwrap())
    }

    /// Values assigned so far; unassigned indices read as `None`.
    pub fn partial(&self) -> impl Iterator<Item = Option<ThetaValue>> + '_ {
        self.values.iter().map(|v| v.map(|(x, _)| x))
    }

    /// Closes the run; any Theta left undefined is `*`.
    pub fn finish(self) -> MachineRun {
        let (values, types) = self.values.into_iter().map(|v| v.unwrap_or((ThetaValue::Star, None))).unzip();
        MachineRun {
            theta: ThetaSequence { values, types },
            stages: self.stages,
            board: self.board,
        }
    }
}

pub fn run_machine(path: &PathGamma, source: &mut dyn OutcomeSource) -> Result<MachineRun> {
    let mut m = StateMachine::new(path.clone());
    while !m.is_finished() {
        m.advance(source)?;
    }
    Ok(m.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all(v: bool) -> impl FnMut(&ThetaQuery) -> Option<bool> {
        move |_| Some(v)
    }

    #[test]
    fn first_clean_step_is_type_c() {
        let path = PathGamma::from_steps(&[1]).unwrap();
        let mut board = EdgeStateBoard::new();
        let out = advance_stage(&mut board, &path, 0, &mut all(true)).unwrap();
        assert_eq!(out.assignments[0].ty, Some(ThetaType::C));
        assert_eq!(board.state(0), EdgeState::Dirty);
        assert_eq!(board.state(-1), EdgeState::Dirty);
        assert_eq!(out.record.steps, 1);
    }

    #[test]
    fn u_turn_on_dirty_edge_is_type_d() {
        // 0 -> 1 dirties (0,1); 1 -> 0 -> 1 then U-turns on it.
        let path = PathGamma::from_steps(&[1, -1, 1]).unwrap();
        let run = run_machine(&path, &mut all(true)).unwrap();
        assert_eq!(run.theta.values[1], ThetaValue::Star);
        assert_eq!(run.theta.types[2], Some(ThetaType::D));
    }

    #[test]
    fn wait_grants_usable_only_on_one() {
        // Steps 0 and 1 dirty (-1,0), (0,1), (1,2); the stage at step 2 walks
        // left over dirty (1,2) into dirty (0,1).
        let path = PathGamma::from_steps(&[1, 1, -1, -1]).unwrap();
        for v in [false, true] {
            let mut m = StateMachine::new(path.clone());
            let mut src = all(v);
            let mut last = None;
            while !m.is_finished() {
                last = Some(m.advance(&mut src).unwrap().clone());
            }
            let rec = last.unwrap();
            assert_eq!(rec.start, 2);
            assert_eq!(rec.case, StageCase::DirtyAheadDirty);
            assert_eq!(rec.with_wait, v);
            assert_eq!(m.board().state(1) == EdgeState::Usable { since: 4 }, v);
            assert!(rec.accounting_holds());
        }
    }

    #[test]
    fn missing_outcome_is_a_contract_error() {
        let path = PathGamma::from_steps(&[1, 1]).unwrap();
        let mut src = ScriptedOutcomes::new(vec![]);
        assert!(matches!(run_machine(&path, &mut src), Err(Error::Contract(_))));
    }

    #[test]
    fn wrong_stage_start_rejected() {
        let path = PathGamma::from_steps(&[1, 1, 1]).unwrap();
        let mut board = EdgeStateBoard::new();
        assert!(advance_stage(&mut board, &path, 1, &mut all(true)).is_err());
    }

    #[test]
    fn recording_replays_exactly() {
        let path = PathGamma::from_steps(&[1, -1, -1, 1, 1, 1, -1, 1]).unwrap();
        let mut flip = false;
        let mut rec = Recording::new(move |_: &ThetaQuery| {
            flip = !flip;
            Some(flip)
        });
        let a = run_machine(&path, &mut rec).unwrap();
        let b = run_machine(&path, &mut rec.replay()).unwrap();
        assert_eq!(a, b);
    }
}
