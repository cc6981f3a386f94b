// slice: reject
// expect: reject RL0103
// rustc: E0507
fn steal(r: &Box<i32>) -> Box<i32> {
    return *r;
}
