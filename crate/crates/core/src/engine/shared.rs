use std::sync::{Arc, RwLock};

use crate::data::CentroidSet;

/// One consistent view of the best published incumbent.
#[derive(Clone, Debug)]
pub struct BestSnapshot {
    /// `None` until the first publication.
    pub worker: Option<usize>,
    pub objective: f64,
    pub centroids: CentroidSet,
    pub version: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Publication {
    pub version: u64,
    pub worker: usize,
    pub objective: f64,
}

#[derive(Debug)]
struct State {
    current: Arc<BestSnapshot>,
    history: Vec<Publication>,
}

/// The best incumbent across workers.
///
/// Readers get an immutable `Arc` snapshot, so a centroid matrix is never
/// observed half-written. Publication is conditional: it only succeeds when the
/// candidate objective is strictly below the published one.
#[derive(Debug)]
pub struct SharedBest {
    state: RwLock<State>,
}

impl SharedBest {
    pub fn new(k: usize, n: usize) -> Self {
        let current = Arc::new(BestSnapshot {
            worker: None,
            objective: f64::INFINITY,
            centroids: CentroidSet::degenerate(k, n),
            version: 0,
        });
        Self {
            state: RwLock::new(State {
                current,
                history: Vec::new(),
            }),
        }
    }

    pub fn snapshot(&self) -> Arc<BestSnapshot> {
        Arc::clone(&self.state.read().expect("shared best lock poisoned").current)
    }

    /// Publishes `centroids` if `objective` beats the current best. Returns
    /// whether the publication went through.
    pub fn offer(&self, worker: usize, objective: f64, centroids: &CentroidSet) -> bool {
        let mut state = self.state.write().expect("shared best lock poisoned");
        if !(objective < state.current.objective) {
            return false;
        }
        let version = state.current.version + 1;
        state.current = Arc::new(BestSnapshot {
            worker: Some(worker),
            objective,
            centroids: centroids.clone(),
            version,
        });
        state.history.push(Publication {
            version,
            worker,
            objective,
        });
        true
    }

    /// Every successful publication, in version order.
    pub fn history(&self) -> Vec<Publication> {
        self.state.read().expect("shared best lock poisoned").history.clone()
    }
}
