//! Threaded driver for the worker core: one reasoning thread per episode,
//! bounded channels, immutable snapshot payloads. The producer never
//! blocks; a full inbox just defers the batch to the next tick.

use std::sync::Arc;
use std::thread::JoinHandle;

use crossbeam_channel::{bounded, Receiver, Sender, TryRecvError, TrySendError};

use crate::oracle::{Instruction, SemanticOracle};

use super::{OracleCallRecord, SubgraphTask, WorkerConfig, WorkerCore, WorkerEvent, WorkerStats};

struct Batch {
    tasks: Vec<SubgraphTask>,
    graph_version: u64,
}

/// What the worker thread reports back.
#[derive(Clone, Debug)]
pub enum WorkerOutput {
    Event(WorkerEvent),
    Record(OracleCallRecord),
}

pub struct ReasoningHandle {
    batch_tx: Sender<Batch>,
    output_rx: Receiver<WorkerOutput>,
    join: JoinHandle<WorkerStats>,
}

/// Spawn the reasoning thread. The inbox is bounded; `submit` uses
/// try-send semantics so the perception side never waits on the worker.
pub fn spawn_worker(
    oracle: Arc<dyn SemanticOracle>,
    instruction: Instruction,
    cfg: WorkerConfig,
) -> ReasoningHandle {
    let (batch_tx, batch_rx) = bounded::<Batch>(8);
    let (output_tx, output_rx) = bounded::<WorkerOutput>(256);

    let join = std::thread::spawn(move || {
        let mut core = WorkerCore::new(instruction, cfg);
        'run: loop {
            // drain the inbox; the newest snapshot supersedes queued work
            loop {
                match batch_rx.try_recv() {
                    Ok(b) => core.submit(b.tasks, b.graph_version),
                    Err(TryRecvError::Empty) => break,
                    Err(TryRecvError::Disconnected) => break 'run,
                }
            }
            if !core.has_pending() {
                // idle: block until there is work or the producer hangs up
                match batch_rx.recv() {
                    Ok(b) => {
                        core.submit(b.tasks, b.graph_version);
                        continue;
                    }
                    Err(_) => break,
                }
            }

            let event = core.step(oracle.as_ref());
            for r in core.take_records() {
                let _ = output_tx.try_send(WorkerOutput::Record(r));
            }
            if let Some(event) = event {
                // a result computed against a superseded snapshot is only
                // accepted while its subgraph still exists
                let keep = match &event {
                    WorkerEvent::Found(found) => {
                        let mut superseded = false;
                        loop {
                            match batch_rx.try_recv() {
                                Ok(b) => {
                                    core.submit(b.tasks, b.graph_version);
                                    superseded = true;
                                }
                                Err(_) => break,
                            }
                        }
                        !superseded || core.hash_current(found.content_hash)
                    }
                    WorkerEvent::Exhausted { .. } => true,
                };
                if keep {
                    let _ = output_tx.try_send(WorkerOutput::Event(event));
                }
            }
        }
        core.stats()
    });

    ReasoningHandle {
        batch_tx,
        output_rx,
        join,
    }
}

impl ReasoningHandle {
    /// Hand a fresh decomposition to the worker. Returns false when the
    /// inbox is full; the caller retries with a newer snapshot later.
    pub fn submit(&self, tasks: Vec<SubgraphTask>, graph_version: u64) -> bool {
        match self.batch_tx.try_send(Batch {
            tasks,
            graph_version,
        }) {
            Ok(()) => true,
            Err(TrySendError::Full(_)) => false,
            Err(TrySendError::Disconnected(_)) => false,
        }
    }

    /// Non-blocking drain of everything the worker produced so far.
    pub fn poll(&self) -> Vec<WorkerOutput> {
        self.output_rx.try_iter().collect()
    }

    /// Close the inbox and wait for the thread to finish its current task.
    pub fn shutdown(self) -> WorkerStats {
        drop(self.batch_tx);
        self.join.join().expect("reasoning worker panicked")
    }
}
