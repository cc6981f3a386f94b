// slice: edge-reborrow
// expect: reject RL0203
// rustc: E0506
struct S { x: i32, y: i32 }

fn get_x<'a>(s: &'a mut S) -> &'a mut i32 {
    return &mut s.x;
}

fn main() -> i32 {
    let mut s = S { x: 1, y: 2 };
    let p = get_x(&mut s);
    s.y = 3;
    *p = 7;
    return s.x + s.y;
}
