//! Sampled-mode paths must never hold anything of size `n x L`.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicUsize, Ordering};

use rand_distr::{Distribution, StandardNormal};
use vdselect_core::ambient::center_project;
use vdselect_core::rng::seeded;
use vdselect_core::selectors::{run_path, vd_omp_run, StoppingRule};
use vdselect_core::{AmbientSpace, DenseColumns, DummyLaw, DummyPool};

struct Counting;

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);
static LARGEST: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let live = LIVE.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
        PEAK.fetch_max(live, Ordering::Relaxed);
        LARGEST.fetch_max(layout.size(), Ordering::Relaxed);
        unsafe { System.alloc(layout) }
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        LIVE.fetch_sub(layout.size(), Ordering::Relaxed);
        unsafe { System.dealloc(ptr, layout) }
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        if new_size > layout.size() {
            let live = LIVE.fetch_add(new_size - layout.size(), Ordering::Relaxed) + new_size - layout.size();
            PEAK.fetch_max(live, Ordering::Relaxed);
        } else {
            LIVE.fetch_sub(layout.size() - new_size, Ordering::Relaxed);
        }
        LARGEST.fetch_max(new_size, Ordering::Relaxed);
        unsafe { System.realloc(ptr, layout, new_size) }
    }
}

#[global_allocator]
static GLOBAL: Counting = Counting;

#[test]
fn sampled_paths_stay_far_below_the_dummy_block() {
    let n = 2000;
    let p = 50;
    let l = 4000;
    let block = 8 * n * l;
    let space = AmbientSpace::new(n).unwrap();
    let mut rng = seeded(3);
    let raw: Vec<f64> = (0..n * p).map(|_| StandardNormal.sample(&mut rng)).collect();
    let x = DenseColumns::standardized(space, p, &raw).unwrap();
    let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let y = center_project(&g, &space).unwrap().into_vec();

    for law in [DummyLaw::Spherical, DummyLaw::GaussianUnitProj] {
        let before = LIVE.load(Ordering::Relaxed);
        PEAK.store(before, Ordering::Relaxed);
        LARGEST.store(0, Ordering::Relaxed);
        let pool = DummyPool::sampled(l, law, space, 9);
        let path = run_path(&x, &y, pool, StoppingRule::DummyCount(5)).unwrap();
        assert_eq!(path.dummies_selected, 5);
        let peak = PEAK.load(Ordering::Relaxed) - before;
        let largest = LARGEST.load(Ordering::Relaxed);
        assert!(largest < block / 20, "largest allocation {largest} vs block {block}");
        assert!(peak < block / 4, "peak {peak} vs block {block}");

        let before = LIVE.load(Ordering::Relaxed);
        PEAK.store(before, Ordering::Relaxed);
        let pool = DummyPool::sampled(l, law, space, 9);
        vd_omp_run(&x, &y, pool, StoppingRule::DummyCount(5)).unwrap();
        let peak = PEAK.load(Ordering::Relaxed) - before;
        assert!(peak < block / 4, "omp peak {peak} vs block {block}");
    }
}
