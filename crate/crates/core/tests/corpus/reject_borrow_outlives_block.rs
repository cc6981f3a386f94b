// slice: reject
// expect: reject RL0207
// rustc: E0597
fn main() -> i32 {
    let r: &i32;
    {
        let x = 5;
        r = &x;
    }
    return *r;
}
