/* ECALL interface to the host engine: a7 selects the call. */
#ifndef HYPERCALL_H
#define HYPERCALL_H

__attribute__((noreturn)) static inline void hc_exit(unsigned code) {
    register unsigned a0 __asm__("a0") = code;
    register unsigned a7 __asm__("a7") = 1;
    __asm__ volatile("ecall" : : "r"(a0), "r"(a7));
    __builtin_unreachable();
}

/* Replace len bytes at addr with fresh symbolic input bytes. */
static inline void hc_make_symbolic(void *addr, unsigned len) {
    register void *a0 __asm__("a0") = addr;
    register unsigned a1 __asm__("a1") = len;
    register unsigned a7 __asm__("a7") = 2;
    __asm__ volatile("ecall" : : "r"(a0), "r"(a1), "r"(a7) : "memory");
}

static inline void hc_putchar(unsigned c) {
    register unsigned a0 __asm__("a0") = c;
    register unsigned a7 __asm__("a7") = 3;
    __asm__ volatile("ecall" : : "r"(a0), "r"(a7));
}

#endif
