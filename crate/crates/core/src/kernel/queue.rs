//! Bounded FIFO between the kernel and downstream consumers.
//!
//! The writer side is an [`EventSink`]; what happens when the queue is full
//! depends on the policy. Run summaries are control records and are always
//! delivered with a blocking send regardless of policy.

use crossbeam_channel::{bounded, Receiver, Sender, TrySendError};

use super::{EventSink, KernelEvent, SinkError};

pub const DEFAULT_QUEUE_CAPACITY: usize = 4_096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverflowPolicy {
    /// Block the kernel until the consumer catches up (lossless).
    BlockProducer,
    /// Silently drop the newest sample.
    DropNewest,
    /// Abort the run with a queue-overflow error.
    Fail,
}

pub struct QueueWriter {
    tx: Sender<KernelEvent>,
    policy: OverflowPolicy,
}

pub struct QueueReader {
    rx: Receiver<KernelEvent>,
}

/// A bounded event queue with the given overflow policy.
pub fn bounded_event_queue(capacity: usize, policy: OverflowPolicy) -> (QueueWriter, QueueReader) {
    let (tx, rx) = bounded(capacity);
    (QueueWriter { tx, policy }, QueueReader { rx })
}

impl EventSink for QueueWriter {
    fn emit(&mut self, event: KernelEvent) -> Result<(), SinkError> {
        let blocking = matches!(event, KernelEvent::Summary(_)) || self.policy == OverflowPolicy::BlockProducer;
        if blocking {
            return self.tx.send(event).map_err(|_| SinkError::Closed);
        }
        match self.tx.try_send(event) {
            Ok(()) => Ok(()),
            Err(TrySendError::Full(ev)) => match self.policy {
                OverflowPolicy::DropNewest => {
                    drop(ev);
                    Ok(())
                }
                _ => Err(SinkError::Full),
            },
            Err(TrySendError::Disconnected(_)) => Err(SinkError::Closed),
        }
    }
}

impl QueueReader {
    pub fn recv(&self) -> Option<KernelEvent> {
        self.rx.recv().ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = KernelEvent> + '_ {
        self.rx.iter()
    }
}

impl IntoIterator for QueueReader {
    type Item = KernelEvent;
    type IntoIter = crossbeam_channel::IntoIter<KernelEvent>;

    fn into_iter(self) -> Self::IntoIter {
        self.rx.into_iter()
    }
}
