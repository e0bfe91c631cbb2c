/*
 * Fixture helper built against the system libjpeg. Used only to regenerate
 * files under testdata/; nothing in the Rust build depends on it.
 *
 *   jpegtool enc <in.pgm> <out.jpg> <quality> [restart_rows] [flags...]
 *       flags: progressive | arith | optimize
 *   jpegtool dump <in.jpg> <out.coef>     (COEF1 sidecar, via jpeg_read_coefficients)
 *   jpegtool decode <in.jpg> <out.pgm>    (integer slow IDCT)
 *
 * Build: cc -O2 -o jpegtool jpegtool.c -ljpeg
 */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <jpeglib.h>

static unsigned char *read_pgm(const char *path, int *w, int *h) {
    FILE *f = fopen(path, "rb");
    if (!f) { perror(path); exit(1); }
    int maxval;
    if (fscanf(f, "P5 %d %d %d", w, h, &maxval) != 3) { fprintf(stderr, "bad pgm\n"); exit(1); }
    fgetc(f);
    unsigned char *buf = malloc((size_t)(*w) * (*h));
    if (fread(buf, 1, (size_t)(*w) * (*h), f) != (size_t)(*w) * (*h)) { fprintf(stderr, "short pgm\n"); exit(1); }
    fclose(f);
    return buf;
}

static int enc(int argc, char **argv) {
    int w, h;
    unsigned char *px = read_pgm(argv[2], &w, &h);
    int quality = atoi(argv[4]);
    int restart_rows = argc > 5 ? atoi(argv[5]) : 0;
    struct jpeg_compress_struct c;
    struct jpeg_error_mgr err;
    c.err = jpeg_std_error(&err);
    jpeg_create_compress(&c);
    FILE *out = fopen(argv[3], "wb");
    jpeg_stdio_dest(&c, out);
    c.image_width = w;
    c.image_height = h;
    c.input_components = 1;
    c.in_color_space = JCS_GRAYSCALE;
    jpeg_set_defaults(&c);
    jpeg_set_quality(&c, quality, TRUE);
    c.dct_method = JDCT_ISLOW;
    c.restart_in_rows = restart_rows;
    for (int i = 6; i < argc; i++) {
        if (!strcmp(argv[i], "progressive")) jpeg_simple_progression(&c);
        else if (!strcmp(argv[i], "arith")) c.arith_code = TRUE;
        else if (!strcmp(argv[i], "optimize")) c.optimize_coding = TRUE;
    }
    jpeg_start_compress(&c, TRUE);
    while (c.next_scanline < c.image_height) {
        JSAMPROW row = px + (size_t)c.next_scanline * w;
        jpeg_write_scanlines(&c, &row, 1);
    }
    jpeg_finish_compress(&c);
    jpeg_destroy_compress(&c);
    fclose(out);
    free(px);
    return 0;
}

static void put_u32(FILE *f, unsigned v) {
    unsigned char b[4] = { v & 255, (v >> 8) & 255, (v >> 16) & 255, (v >> 24) & 255 };
    fwrite(b, 1, 4, f);
}

static void put_16(FILE *f, int v) {
    unsigned u = (unsigned)v & 0xffff;
    unsigned char b[2] = { u & 255, (u >> 8) & 255 };
    fwrite(b, 1, 2, f);
}

static int dump(char **argv) {
    struct jpeg_decompress_struct d;
    struct jpeg_error_mgr err;
    d.err = jpeg_std_error(&err);
    jpeg_create_decompress(&d);
    FILE *in = fopen(argv[2], "rb");
    jpeg_stdio_src(&d, in);
    jpeg_read_header(&d, TRUE);
    jvirt_barray_ptr *arrays = jpeg_read_coefficients(&d);
    jpeg_component_info *comp = &d.comp_info[0];
    FILE *out = fopen(argv[3], "wb");
    fwrite("COEF1", 1, 5, out);
    put_u32(out, d.image_width);
    put_u32(out, d.image_height);
    JQUANT_TBL *qt = comp->quant_table;
    for (int k = 0; k < 64; k++) put_16(out, qt->quantval[k]);
    int bw = (d.image_width + 7) / 8, bh = (d.image_height + 7) / 8;
    for (int by = 0; by < bh; by++) {
        JBLOCKARRAY rows = (*d.mem->access_virt_barray)((j_common_ptr)&d, arrays[0], by, 1, FALSE);
        for (int bx = 0; bx < bw; bx++)
            for (int k = 0; k < 64; k++) put_16(out, rows[0][bx][k]);
    }
    fclose(out);
    jpeg_finish_decompress(&d);
    jpeg_destroy_decompress(&d);
    fclose(in);
    return 0;
}

static int decode(char **argv) {
    struct jpeg_decompress_struct d;
    struct jpeg_error_mgr err;
    d.err = jpeg_std_error(&err);
    jpeg_create_decompress(&d);
    FILE *in = fopen(argv[2], "rb");
    jpeg_stdio_src(&d, in);
    jpeg_read_header(&d, TRUE);
    d.dct_method = JDCT_ISLOW;
    jpeg_start_decompress(&d);
    FILE *out = fopen(argv[3], "wb");
    fprintf(out, "P5\n%d %d\n255\n", d.output_width, d.output_height);
    unsigned char *row = malloc(d.output_width);
    while (d.output_scanline < d.output_height) {
        jpeg_read_scanlines(&d, &row, 1);
        fwrite(row, 1, d.output_width, out);
    }
    jpeg_finish_decompress(&d);
    jpeg_destroy_decompress(&d);
    fclose(out);
    fclose(in);
    free(row);
    return 0;
}

int main(int argc, char **argv) {
    if (argc >= 5 && !strcmp(argv[1], "enc")) return enc(argc, argv);
    if (argc == 4 && !strcmp(argv[1], "dump")) return dump(argv);
    if (argc == 4 && !strcmp(argv[1], "decode")) return decode(argv);
    fprintf(stderr, "usage: jpegtool enc|dump|decode ...\n");
    return 2;
}
