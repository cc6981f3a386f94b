// slice: edge-invariance
// expect: reject RL0205
// rustc: error
fn shrink<'a, 'b: 'a>(x: &'a mut &'b i32) -> &'a mut &'a i32 {
    return x;
}
