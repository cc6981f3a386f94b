// slice: edge-reborrow
// expect: reject RL0203
// rustc: E0506
fn main() -> i32 {
    let mut x = 1;
    let m = &mut x;
    let r = &*m;
    *m = 2;
    return *r;
}
