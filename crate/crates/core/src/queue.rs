//! Named in-order work queues.
//!
//! Work submitted to one queue runs on that queue's worker thread strictly in
//! submission order. Different queues run concurrently.

use std::sync::mpsc;
use std::thread;

type Job = Box<dyn FnOnce() + Send + 'static>;

pub struct Queue {
    name: String,
    sender: Option<mpsc::Sender<Job>>,
    worker: Option<thread::JoinHandle<()>>,
}

/// Handle to the result of one submitted job.
pub struct Completion<R> {
    receiver: mpsc::Receiver<thread::Result<R>>,
}

impl<R> Completion<R> {
    /// Blocks until the job has run. Re-raises a panic from the job.
    pub fn wait(self) -> R {
        match self.receiver.recv().expect("queue worker exited before completing the job") {
            Ok(r) => r,
            Err(payload) => std::panic::resume_unwind(payload),
        }
    }

    /// Result if the job already finished.
    pub fn try_wait(&self) -> Option<R> {
        match self.receiver.try_recv().ok()? {
            Ok(r) => Some(r),
            Err(payload) => std::panic::resume_unwind(payload),
        }
    }
}

impl Queue {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        let (sender, receiver) = mpsc::channel::<Job>();
        let worker = thread::Builder::new()
            .name(format!("queue-{name}"))
            .spawn(move || {
                for job in receiver {
                    job();
                }
            })
            .expect("spawning queue worker");
        Self {
            name,
            sender: Some(sender),
            worker: Some(worker),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn submit<R, F>(&self, f: F) -> Completion<R>
    where
        R: Send + 'static,
        F: FnOnce() -> R + Send + 'static,
    {
        let (tx, rx) = mpsc::sync_channel(1);
        let job: Job = Box::new(move || {
            let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f));
            let _ = tx.send(out);
        });
        self.sender
            .as_ref()
            .expect("queue is open")
            .send(job)
            .expect("queue worker is alive");
        Completion { receiver: rx }
    }

    /// Waits for everything submitted so far.
    pub fn synchronize(&self) {
        self.submit(|| ()).wait();
    }
}

impl Drop for Queue {
    fn drop(&mut self) {
        drop(self.sender.take());
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

impl std::fmt::Debug for Queue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Queue").field("name", &self.name).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::{Arc, Mutex};

    #[test]
    fn jobs_run_in_order() {
        let q = Queue::new("s0");
        let log = Arc::new(Mutex::new(Vec::new()));
        let handles: Vec<_> = (0..20)
            .map(|k| {
                let log = Arc::clone(&log);
                q.submit(move || {
                    log.lock().unwrap().push(k);
                    k * 2
                })
            })
            .collect();
        let outs: Vec<_> = handles.into_iter().map(Completion::wait).collect();
        assert_eq!(outs, (0..20).map(|k| k * 2).collect::<Vec<_>>());
        assert_eq!(*log.lock().unwrap(), (0..20).collect::<Vec<_>>());
        assert_eq!(q.name(), "s0");
    }

    #[test]
    #[should_panic(expected = "boom")]
    fn panics_reach_the_waiter() {
        let q = Queue::new("p");
        q.submit(|| panic!("boom")).wait();
    }
}
