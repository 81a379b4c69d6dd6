use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use crasp_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    let text = CStr::from_ptr(s).to_str().unwrap().to_string();
    crasp_string_free(s);
    text
}

unsafe fn last_error() -> String {
    let e = crasp_last_error();
    assert!(!e.is_null());
    CStr::from_ptr(e).to_string_lossy().into_owned()
}

const TOGGLE: &str = "alphabet {'a','b'}
bool A := Q('a')
bool B := Q('b')
next 'b' := A
next 'a' := B";

#[test]
fn parse_next_generate_free() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(crasp_program_parse(c(TOGGLE).as_ptr(), &mut p), CraspStatus::Ok);
        assert!(crasp_program_op_count(p) >= 2);
        let mut out = ptr::null_mut();
        assert_eq!(crasp_program_next_token(p, c("a b a").as_ptr(), &mut out), CraspStatus::Ok);
        assert_eq!(take(out), "b");
        assert_eq!(crasp_program_generate(p, c("a").as_ptr(), 4, &mut out), CraspStatus::Ok);
        assert_eq!(take(out), "b a b a");
        crasp_program_free(p);
    }
}

#[test]
fn halting_gives_null_token() {
    unsafe {
        let mut p = ptr::null_mut();
        let src = "alphabet {'a'}\nbool N := NOT(Q('a'))\nnext 'a' := N";
        assert_eq!(crasp_program_parse(c(src).as_ptr(), &mut p), CraspStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(crasp_program_next_token(p, c("a").as_ptr(), &mut out), CraspStatus::Ok);
        assert!(out.is_null());
        crasp_program_free(p);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(crasp_program_parse(c("bool X := FOO(").as_ptr(), &mut p), CraspStatus::ParseError);
        assert!(last_error().contains("line 1"));
        assert!(p.is_null());
        assert_eq!(crasp_program_parse(ptr::null(), &mut p), CraspStatus::NullArgument);

        assert_eq!(crasp_program_parse(c(TOGGLE).as_ptr(), &mut p), CraspStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(crasp_program_next_token(p, c("a z").as_ptr(), &mut out), CraspStatus::EvalError);
        crasp_program_free(p);

        let both = "alphabet {'a','b'}\nbool T := TRUE\nnext 'a' := T\nnext 'b' := T";
        assert_eq!(crasp_program_parse(c(both).as_ptr(), &mut p), CraspStatus::Ok);
        assert_eq!(crasp_program_next_token(p, c("a").as_ptr(), &mut out), CraspStatus::AmbiguousNext);
        crasp_program_free(p);
        crasp_program_free(ptr::null_mut());
        crasp_string_free(ptr::null_mut());
    }
}

#[test]
fn oracles_over_the_abi() {
    unsafe {
        let mut out = ptr::null_mut();
        let ctx = c("n s 0 w 6 u p 9 v 8");
        assert_eq!(crasp_oracle_retrieval(c("UR").as_ptr(), ctx.as_ptr(), c("u").as_ptr(), &mut out), CraspStatus::Ok);
        assert_eq!(take(out), "p");
        assert_eq!(crasp_oracle_retrieval(c("ul").as_ptr(), ctx.as_ptr(), c("u").as_ptr(), &mut out), CraspStatus::Ok);
        assert_eq!(take(out), "6");
        assert_eq!(crasp_oracle_copy(c("UB").as_ptr(), c("S y b 5 D E H i h O").as_ptr(), &mut out), CraspStatus::Ok);
        assert_eq!(take(out), "O h i H E D 5 b y S");
        assert_eq!(crasp_oracle_copy(c("UF").as_ptr(), c("a a").as_ptr(), &mut out), CraspStatus::InvalidInstance);
        assert_eq!(crasp_oracle_copy(c("XX").as_ptr(), c("a").as_ptr(), &mut out), CraspStatus::UnknownTask);
        assert!(last_error().contains("XX"));
    }
}

#[test]
fn analysis_is_json() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(crasp_analyze(c("a b c").as_ptr(), c("a b x c").as_ptr(), 1, -1, -1, &mut out), CraspStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["transitions"][0]["src_index"], 1);
        assert_eq!(v["alignment"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(crasp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
