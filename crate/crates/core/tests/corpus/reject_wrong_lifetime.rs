// slice: reject
// expect: reject RL0205
// rustc: error
fn pick<'a, 'b>(x: &'a i32, y: &'b i32) -> &'a i32 {
    return y;
}
