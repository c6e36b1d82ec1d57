/* Concrete insertion sort of fixed bytes; prints the result in hex. */
#include "hypercall.h"

static unsigned char data[8] = {0x9C, 0x03, 0xF1, 0x2A, 0x2A, 0x00, 0xFF, 0x41};

static void put_hex(unsigned char v) {
    const char digits[] = "0123456789abcdef";
    hc_putchar(digits[v >> 4]);
    hc_putchar(digits[v & 0xF]);
}

void _start(void) {
    for (int i = 1; i < 8; i++) {
        unsigned char key = data[i];
        int j = i - 1;
        while (j >= 0 && data[j] > key) {
            data[j + 1] = data[j];
            j--;
        }
        data[j + 1] = key;
    }
    unsigned sum = 0;
    for (int i = 0; i < 8; i++) {
        put_hex(data[i]);
        sum = sum * 3 + data[i];
    }
    hc_putchar('\n');
    hc_exit(sum & 0xFF);
}
