//! A small bulk-synchronous superstep runtime.
//!
//! `p` workers run a [`SuperstepProgram`] in lockstep. In each superstep a
//! worker reads the messages addressed to it in the previous superstep, updates
//! its own state and queues messages for other workers. Queued messages are
//! delivered at the barrier that ends the superstep, so data sent in superstep
//! `t` is visible in superstep `t + 1` and never earlier.
//!
//! A worker's inbox is ordered by source worker id, then by send order. That
//! ordering is fixed by construction, which makes every run deterministic:
//! [`run_supersteps`] (one thread per worker) and [`sequential_simulate`]
//! (round-robin on the calling thread) produce identical results.
//!
//! The run ends after a superstep in which every worker voted
//! [`Vote::Halt`] and no messages were sent. If messages are in flight, all
//! workers run one more superstep so the messages are consumed.

use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Barrier, Mutex};
use std::thread;

use thiserror::Error;

pub type WorkerId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BspError {
    #[error("worker {worker} addressed a message to worker {dest} in superstep {superstep}, but only workers 0..{p} exist")]
    InvalidDestination {
        worker: WorkerId,
        superstep: usize,
        dest: WorkerId,
        p: usize,
    },

    #[error("worker {worker} panicked in superstep {superstep}: {message}")]
    WorkerPanicked {
        worker: WorkerId,
        superstep: usize,
        message: String,
    },

    #[error("expected {expected} initial worker states, got {got}")]
    StateCount { expected: usize, got: usize },

    #[error("worker count must be at least 1")]
    NoWorkers,
}

/// A message in transit between two workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope<M> {
    pub source: WorkerId,
    pub dest: WorkerId,
    /// Superstep in which the message was sent.
    pub superstep: usize,
    pub payload: M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vote {
    Continue,
    Halt,
}

/// Per-run counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    /// Supersteps executed, each ending in a barrier.
    pub supersteps: usize,
    /// Supersteps in which at least one message was sent.
    pub communicating_supersteps: usize,
    /// Messages delivered over the whole run.
    pub messages: usize,
}

/// What a worker sees during one superstep.
pub struct Superstep<M> {
    id: WorkerId,
    p: usize,
    index: usize,
    inbox: Vec<Envelope<M>>,
    outbox: Vec<(WorkerId, M)>,
}

impl<M> Superstep<M> {
    fn new(id: WorkerId, p: usize, index: usize, inbox: Vec<Envelope<M>>) -> Self {
        Superstep {
            id,
            p,
            index,
            inbox,
            outbox: Vec::new(),
        }
    }

    pub fn id(&self) -> WorkerId {
        self.id
    }

    pub fn nprocs(&self) -> usize {
        self.p
    }

    /// Index of the current superstep, starting at 0.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Messages delivered at the last barrier, ordered by source then send order.
    pub fn inbox(&self) -> &[Envelope<M>] {
        &self.inbox
    }

    pub fn take_inbox(&mut self) -> Vec<Envelope<M>> {
        std::mem::take(&mut self.inbox)
    }

    /// Queues `payload` for delivery to `dest` at the end of this superstep.
    pub fn send(&mut self, dest: WorkerId, payload: M) {
        self.outbox.push((dest, payload));
    }
}

/// The per-worker body of a bulk-synchronous program.
///
/// A worker can only touch its own state and its inbox; everything else
/// arrives through messages.
pub trait SuperstepProgram: Sync {
    type State: Send;
    type Message: Send;

    fn superstep(&self, step: &mut Superstep<Self::Message>, state: &mut Self::State) -> Vote;
}

/// One locked mailbox per (destination, source) pair.
type Mailboxes<M> = Vec<Mutex<Vec<Envelope<M>>>>;

/// Runs `program` on `states.len()` workers, one thread each.
pub fn run_supersteps<P: SuperstepProgram>(
    program: &P,
    states: Vec<P::State>,
) -> Result<(Vec<P::State>, RunStats), BspError> {
    let p = states.len();
    if p == 0 {
        return Err(BspError::NoWorkers);
    }
    if p == 1 {
        // Nothing to overlap with; skip the thread and the barrier.
        return sequential_simulate(program, states);
    }

    // mail[t % 2][dest * p + source] holds what `source` sent to `dest` in superstep t.
    let mail: [Mailboxes<P::Message>; 2] = [
        (0..p * p).map(|_| Mutex::new(Vec::new())).collect(),
        (0..p * p).map(|_| Mutex::new(Vec::new())).collect(),
    ];
    // Per-superstep tallies, triple buffered: slot t % 3 is written before
    // barrier t, read after it, and reset by worker 0 during superstep t + 2.
    // A fast worker already in superstep t + 1 never touches slot t.
    let continuing: [AtomicUsize; 3] = Default::default();
    let sent: [AtomicUsize; 3] = Default::default();
    let failed: [AtomicUsize; 3] = Default::default();
    let error: Mutex<Option<BspError>> = Mutex::new(None);
    let barrier = Barrier::new(p);
    let stats = Mutex::new(RunStats::default());

    let record_error = |t: usize, err: BspError| {
        let mut slot = error.lock().unwrap();
        // keep the error from the lowest worker id for a stable diagnostic
        let replace = match (&*slot, &err) {
            (None, _) => true,
            (Some(old), new) => error_worker(new) < error_worker(old),
        };
        if replace {
            *slot = Some(err);
        }
        failed[t % 3].fetch_add(1, Ordering::SeqCst);
    };

    let finals: Vec<P::State> = thread::scope(|scope| {
        let handles: Vec<_> = states
            .into_iter()
            .enumerate()
            .map(|(id, mut state)| {
                let mail = &mail;
                let continuing = &continuing;
                let sent = &sent;
                let failed = &failed;
                let barrier = &barrier;
                let stats = &stats;
                let record_error = &record_error;
                scope.spawn(move || {
                    let mut t = 0usize;
                    loop {
                        if id == 0 {
                            continuing[(t + 1) % 3].store(0, Ordering::SeqCst);
                            sent[(t + 1) % 3].store(0, Ordering::SeqCst);
                            failed[(t + 1) % 3].store(0, Ordering::SeqCst);
                        }
                        let inbox = if t == 0 {
                            Vec::new()
                        } else {
                            collect_inbox(&mail[(t - 1) % 2], id, p)
                        };
                        let mut step = Superstep::new(id, p, t, inbox);
                        let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
                            program.superstep(&mut step, &mut state)
                        }));
                        match outcome {
                            Ok(vote) => {
                                match post_outbox(&mail[t % 2], step.outbox, id, p, t) {
                                    Ok(count) => {
                                        sent[t % 3].fetch_add(count, Ordering::SeqCst);
                                    }
                                    Err(err) => record_error(t, err),
                                }
                                if vote == Vote::Continue {
                                    continuing[t % 3].fetch_add(1, Ordering::SeqCst);
                                }
                            }
                            Err(payload) => record_error(
                                t,
                                BspError::WorkerPanicked {
                                    worker: id,
                                    superstep: t,
                                    message: panic_message(payload.as_ref()),
                                },
                            ),
                        }

                        barrier.wait();

                        let messages = sent[t % 3].load(Ordering::SeqCst);
                        let active = continuing[t % 3].load(Ordering::SeqCst);
                        let failures = failed[t % 3].load(Ordering::SeqCst);
                        if id == 0 {
                            let mut s = stats.lock().unwrap();
                            s.supersteps += 1;
                            s.messages += messages;
                            if messages > 0 {
                                s.communicating_supersteps += 1;
                            }
                        }
                        if failures > 0 || (active == 0 && messages == 0) {
                            break;
                        }
                        t += 1;
                    }
                    state
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .expect("worker thread panicked outside the program body")
            })
            .collect()
    });

    if let Some(err) = error.into_inner().unwrap() {
        return Err(err);
    }
    Ok((finals, stats.into_inner().unwrap()))
}

/// Runs `program` on `states.len()` simulated workers on the calling thread.
///
/// Worker bodies execute round-robin in id order with the same exchange
/// semantics as [`run_supersteps`]; it is the reference the threaded runtime
/// is tested against.
pub fn sequential_simulate<P: SuperstepProgram>(
    program: &P,
    mut states: Vec<P::State>,
) -> Result<(Vec<P::State>, RunStats), BspError> {
    let p = states.len();
    if p == 0 {
        return Err(BspError::NoWorkers);
    }
    let mut stats = RunStats::default();
    let mut inboxes: Vec<Vec<Envelope<P::Message>>> = (0..p).map(|_| Vec::new()).collect();
    let mut t = 0usize;
    loop {
        let mut next: Vec<Vec<Envelope<P::Message>>> = (0..p).map(|_| Vec::new()).collect();
        let mut active = 0;
        let mut messages = 0;
        for (id, state) in states.iter_mut().enumerate() {
            let mut step = Superstep::new(id, p, t, std::mem::take(&mut inboxes[id]));
            let vote =
                panic::catch_unwind(AssertUnwindSafe(|| program.superstep(&mut step, state)))
                    .map_err(|payload| BspError::WorkerPanicked {
                        worker: id,
                        superstep: t,
                        message: panic_message(payload.as_ref()),
                    })?;
            if vote == Vote::Continue {
                active += 1;
            }
            // Workers run in id order, so appending keeps each inbox sorted by source.
            for (dest, payload) in step.outbox {
                if dest >= p {
                    return Err(BspError::InvalidDestination {
                        worker: id,
                        superstep: t,
                        dest,
                        p,
                    });
                }
                next[dest].push(Envelope {
                    source: id,
                    dest,
                    superstep: t,
                    payload,
                });
                messages += 1;
            }
        }
        stats.supersteps += 1;
        stats.messages += messages;
        if messages > 0 {
            stats.communicating_supersteps += 1;
        }
        if active == 0 && messages == 0 {
            return Ok((states, stats));
        }
        inboxes = next;
        t += 1;
    }
}

fn collect_inbox<M>(slots: &[Mutex<Vec<Envelope<M>>>], id: WorkerId, p: usize) -> Vec<Envelope<M>> {
    let mut inbox = Vec::new();
    for source in 0..p {
        let mut slot = slots[id * p + source].lock().unwrap();
        if inbox.is_empty() {
            inbox = std::mem::take(&mut *slot);
        } else {
            inbox.append(&mut slot);
        }
    }
    inbox
}

fn post_outbox<M>(
    slots: &[Mutex<Vec<Envelope<M>>>],
    outbox: Vec<(WorkerId, M)>,
    id: WorkerId,
    p: usize,
    t: usize,
) -> Result<usize, BspError> {
    if let Some(&(dest, _)) = outbox.iter().find(|(dest, _)| *dest >= p) {
        return Err(BspError::InvalidDestination {
            worker: id,
            superstep: t,
            dest,
            p,
        });
    }
    let count = outbox.len();
    for (dest, payload) in outbox {
        slots[dest * p + id].lock().unwrap().push(Envelope {
            source: id,
            dest,
            superstep: t,
            payload,
        });
    }
    Ok(count)
}

fn error_worker(err: &BspError) -> WorkerId {
    match err {
        BspError::InvalidDestination { worker, .. } | BspError::WorkerPanicked { worker, .. } => {
            *worker
        }
        _ => 0,
    }
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Each worker forwards its block to `(id + 1) mod p`, then adopts what it receives.
    struct Rotate;

    impl SuperstepProgram for Rotate {
        type State = Vec<u32>;
        type Message = Vec<u32>;

        fn superstep(&self, step: &mut Superstep<Vec<u32>>, state: &mut Vec<u32>) -> Vote {
            match step.index() {
                0 => {
                    let dest = (step.id() + 1) % step.nprocs();
                    step.send(dest, std::mem::take(state));
                    Vote::Continue
                }
                _ => {
                    *state = step.take_inbox().pop().unwrap().payload;
                    Vote::Halt
                }
            }
        }
    }

    struct Noop;

    impl SuperstepProgram for Noop {
        type State = Vec<u32>;
        type Message = ();

        fn superstep(&self, _: &mut Superstep<()>, _: &mut Vec<u32>) -> Vote {
            Vote::Halt
        }
    }

    /// Worker 0 broadcasts its block; everyone records what was visible when.
    struct Broadcast;

    #[derive(Default, Debug, PartialEq)]
    struct Seen {
        block: Vec<u32>,
        visible_at: Vec<(usize, usize)>,
    }

    impl SuperstepProgram for Broadcast {
        type State = Seen;
        type Message = Vec<u32>;

        fn superstep(&self, step: &mut Superstep<Vec<u32>>, state: &mut Seen) -> Vote {
            let t = step.index();
            state.visible_at.push((t, step.inbox().len()));
            if t == 0 && step.id() == 0 {
                for dest in 0..step.nprocs() {
                    step.send(dest, state.block.clone());
                }
            }
            if t == 1 {
                state.block = step.inbox()[0].payload.clone();
                assert_eq!(step.inbox()[0].superstep, 0);
                assert_eq!(step.inbox()[0].source, 0);
            }
            if t == 0 {
                Vote::Continue
            } else {
                Vote::Halt
            }
        }
    }

    struct BadRoute;

    impl SuperstepProgram for BadRoute {
        type State = ();
        type Message = u8;

        fn superstep(&self, step: &mut Superstep<u8>, _: &mut ()) -> Vote {
            if step.index() == 2 && step.id() == 1 {
                step.send(7, 0);
            }
            if step.index() < 3 {
                Vote::Continue
            } else {
                Vote::Halt
            }
        }
    }

    struct Panics;

    impl SuperstepProgram for Panics {
        type State = ();
        type Message = ();

        fn superstep(&self, step: &mut Superstep<()>, _: &mut ()) -> Vote {
            if step.id() == 2 && step.index() == 1 {
                panic!("boom");
            }
            Vote::Continue
        }
    }

    fn blocks(p: usize) -> Vec<Vec<u32>> {
        (0..p as u32).map(|w| vec![w * 10, w * 10 + 1]).collect()
    }

    #[test]
    fn rotate_by_one() {
        for run in [run_supersteps::<Rotate>, sequential_simulate::<Rotate>] {
            let (out, stats) = run(&Rotate, blocks(4)).unwrap();
            assert_eq!(
                out,
                vec![vec![30, 31], vec![0, 1], vec![10, 11], vec![20, 21]]
            );
            assert_eq!(stats.supersteps, 2);
            assert_eq!(stats.communicating_supersteps, 1);
            assert_eq!(stats.messages, 4);
        }
    }

    #[test]
    fn single_worker_sees_empty_inbox() {
        let (out, stats) = run_supersteps(&Rotate, vec![vec![5, 6]]).unwrap();
        assert_eq!(out, vec![vec![5, 6]]);
        assert_eq!(stats.supersteps, 2);
    }

    #[test]
    fn noop_leaves_blocks_unchanged() {
        for run in [run_supersteps::<Noop>, sequential_simulate::<Noop>] {
            let (out, stats) = run(&Noop, blocks(2)).unwrap();
            assert_eq!(out, blocks(2));
            assert_eq!(stats.supersteps, 1);
            assert_eq!(stats.messages, 0);
        }
    }

    #[test]
    fn broadcast_is_visible_only_after_the_barrier() {
        for run in [
            run_supersteps::<Broadcast>,
            sequential_simulate::<Broadcast>,
        ] {
            let states = (0..3)
                .map(|w| Seen {
                    block: vec![w, w + 100],
                    visible_at: vec![],
                })
                .collect();
            let (out, _) = run(&Broadcast, states).unwrap();
            for seen in out {
                assert_eq!(seen.block, vec![0, 100]);
                assert_eq!(seen.visible_at, vec![(0, 0), (1, 1)]);
            }
        }
    }

    #[test]
    fn invalid_destination_is_reported() {
        let expected = BspError::InvalidDestination {
            worker: 1,
            superstep: 2,
            dest: 7,
            p: 3,
        };
        assert_eq!(
            run_supersteps(&BadRoute, vec![(); 3]).unwrap_err(),
            expected
        );
        assert_eq!(
            sequential_simulate(&BadRoute, vec![(); 3]).unwrap_err(),
            expected
        );
        assert!(expected.to_string().contains("worker 1"));
        assert!(expected.to_string().contains("superstep 2"));
    }

    #[test]
    fn failure_stops_every_worker_in_the_same_superstep() {
        // A worker already in superstep t + 1 must not make a slower one stop at t.
        for _ in 0..300 {
            assert!(run_supersteps(&BadRoute, vec![(); 3]).is_err());
        }
    }

    #[test]
    fn worker_panic_does_not_deadlock() {
        let err = run_supersteps(&Panics, vec![(); 4]).unwrap_err();
        assert_eq!(
            err,
            BspError::WorkerPanicked {
                worker: 2,
                superstep: 1,
                message: "boom".into()
            }
        );
    }

    #[test]
    fn empty_worker_set_is_rejected() {
        assert_eq!(
            run_supersteps(&Noop, vec![]).unwrap_err(),
            BspError::NoWorkers
        );
        assert_eq!(
            sequential_simulate(&Noop, vec![]).unwrap_err(),
            BspError::NoWorkers
        );
    }
}
