// slice: accept
// expect: accept
// rustc: ok
// run: 13
fn fill(b: &mut Box<i32>, v: i32) {
    **b = v;
}

fn main() -> i32 {
    let mut b = Box::new(0);
    fill(&mut b, 13);
    return *b;
}
