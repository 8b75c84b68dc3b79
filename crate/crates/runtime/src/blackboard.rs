//! Latest-value slots shared between the loops. Readers get an `Arc` to the
//! most recent value and never block a writer for longer than a pointer swap.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};

use dualplan_core::mapping::VoxelMap;
use dualplan_core::pcp::MotionCommand;
use dualplan_core::{DroneState, PlanPath, PointCloud, Vec3};
use dualplan_sim::{EpisodeEvent, World};

#[derive(Debug)]
pub struct Versioned<T> {
    /// Starts at 0 for the initial value and grows by one per publish.
    pub version: u64,
    /// Time the value was produced.
    pub stamp: f64,
    pub value: T,
}

#[derive(Debug)]
pub struct Slot<T> {
    inner: RwLock<Arc<Versioned<T>>>,
}

impl<T> Slot<T> {
    pub fn new(value: T) -> Self {
        Self {
            inner: RwLock::new(Arc::new(Versioned {
                version: 0,
                stamp: 0.0,
                value,
            })),
        }
    }

    pub fn publish(&self, stamp: f64, value: T) -> u64 {
        let mut guard = self.inner.write();
        let version = guard.version + 1;
        *guard = Arc::new(Versioned { version, stamp, value });
        version
    }

    pub fn read(&self) -> Arc<Versioned<T>> {
        self.inner.read().clone()
    }

    pub fn version(&self) -> u64 {
        self.inner.read().version
    }
}

/// The current map-planner output.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanInfo {
    pub path: PlanPath,
    pub local_goal: Vec3,
}

#[derive(Debug)]
pub struct Blackboard {
    pub state: Slot<DroneState>,
    pub world: Slot<World>,
    pub pcl_4: Slot<PointCloud>,
    pub voxels: Slot<VoxelMap>,
    pub plan: Slot<Option<PlanInfo>>,
    pub command: Slot<MotionCommand>,
    events: Mutex<Vec<EpisodeEvent>>,
    done: AtomicBool,
}

impl Blackboard {
    pub fn new(state: DroneState, world: World, voxels: VoxelMap) -> Self {
        let hold = MotionCommand::hold(&state.position);
        Self {
            state: Slot::new(state),
            world: Slot::new(world),
            pcl_4: Slot::new(PointCloud::earth(Vec::new())),
            voxels: Slot::new(voxels),
            plan: Slot::new(None),
            command: Slot::new(hold),
            events: Mutex::new(Vec::new()),
            done: AtomicBool::new(false),
        }
    }

    pub fn push_event(&self, event: EpisodeEvent) {
        self.events.lock().push(event);
    }

    pub fn events(&self) -> Vec<EpisodeEvent> {
        self.events.lock().clone()
    }

    pub fn finish(&self) {
        self.done.store(true, Ordering::SeqCst);
    }

    pub fn is_done(&self) -> bool {
        self.done.load(Ordering::SeqCst)
    }
}
