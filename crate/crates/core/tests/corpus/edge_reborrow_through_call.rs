// slice: edge-reborrow
// expect: accept
// rustc: ok
// run: 10
struct S { x: i32, y: i32 }

fn get_x<'a>(s: &'a mut S) -> &'a mut i32 {
    return &mut s.x;
}

fn main() -> i32 {
    let mut s = S { x: 1, y: 2 };
    let p = get_x(&mut s);
    *p = 7;
    s.y = 3;
    return s.x + s.y;
}
