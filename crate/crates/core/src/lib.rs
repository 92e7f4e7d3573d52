pub mod bridge;
pub mod costmap;
pub mod keyframe;
pub mod labels;
pub mod nn;
pub mod pgm;
pub mod pipeline;
pub mod planner;
pub mod sim;

// The guide's listings run as doctests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/costmaps.md")]
    mod costmaps {}
    #[doc = include_str!("../../../book/src/planner.md")]
    mod planner {}
    #[doc = include_str!("../../../book/src/keyframe.md")]
    mod keyframe {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/bridge.md")]
    mod bridge {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
