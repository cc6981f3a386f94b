// slice: edge-invariance
// expect: reject RL0207
// rustc: E0597
fn main() -> i32 {
    let x = 1;
    let mut r: &i32 = &x;
    {
        let y = 2;
        let m: &mut &i32 = &mut r;
        *m = &y;
    }
    return *r;
}
