//! A context together with per-level caches of the expensive objects.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::context::{Context, Level};
use crate::distribution::{build_u, UModule};
use crate::doublecomplex::{CanonicalBasis, KWindow};
use crate::kolyvagin::{GammaSolver, H0Space};
use crate::CoreError;

/// Write-once map from level masks to shared values.
struct Cache<T>(Mutex<HashMap<u32, Arc<T>>>);

impl<T> Cache<T> {
    fn new() -> Self {
        Self(Mutex::new(HashMap::new()))
    }

    fn get_or_try<F>(&self, level: Level, build: F) -> Result<Arc<T>, CoreError>
    where
        F: FnOnce() -> Result<T, CoreError>,
    {
        if let Some(v) = self.0.lock().expect("cache lock").get(&level.mask()) {
            return Ok(Arc::clone(v));
        }
        // Built outside the lock; a concurrent duplicate is dropped.
        let built = Arc::new(build()?);
        Ok(self
            .0
            .lock()
            .expect("cache lock")
            .entry(level.mask())
            .or_insert(built)
            .clone())
    }
}

pub struct Engine {
    ctx: Context,
    u: Cache<UModule>,
    h0: Cache<H0Space>,
    gamma: Cache<GammaSolver>,
    windows: Cache<KWindow>,
    canonical: Cache<CanonicalBasis>,
}

impl Engine {
    pub fn new(ctx: Context) -> Self {
        Self {
            ctx,
            u: Cache::new(),
            h0: Cache::new(),
            gamma: Cache::new(),
            windows: Cache::new(),
            canonical: Cache::new(),
        }
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn u(&self, level: Level) -> Arc<UModule> {
        self.u
            .get_or_try(level, || Ok(build_u(&self.ctx, level)))
            .expect("building U_r cannot fail")
    }

    pub fn h0(&self, level: Level) -> Result<Arc<H0Space>, CoreError> {
        self.h0.get_or_try(level, || H0Space::build(self, level))
    }

    pub fn gamma_solver(&self, level: Level) -> Result<Arc<GammaSolver>, CoreError> {
        self.gamma.get_or_try(level, || Ok(GammaSolver::build(&self.ctx, level)))
    }

    /// Window with the default bound `omega(r) + 1`.
    pub fn window(&self, level: Level) -> Result<Arc<KWindow>, CoreError> {
        self.windows
            .get_or_try(level, || KWindow::build(&self.ctx, level, level.omega() + 1))
    }

    pub fn canonical_basis(&self, level: Level) -> Result<Arc<CanonicalBasis>, CoreError> {
        self.canonical.get_or_try(level, || CanonicalBasis::build(self, level))
    }
}
