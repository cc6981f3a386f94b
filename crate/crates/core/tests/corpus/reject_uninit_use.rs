// slice: reject
// expect: reject RL0104
// rustc: E0381
fn main() -> i32 {
    let x: i32;
    let c = true;
    if c {
        x = 1;
    }
    return x;
}
