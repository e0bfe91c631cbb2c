# Reference xoshiro256** seeded through splitmix64, used to freeze the RNG test vectors.
M=(1<<64)-1
def splitmix(x):
    while True:
        x=(x+0x9E3779B97F4A7C15)&M
        z=x
        z=((z^(z>>30))*0xBF58476D1CE4E5B9)&M
        z=((z^(z>>27))*0x94D049BB133111EB)&M
        yield z^(z>>31)
def rotl(x,k): return ((x<<k)|(x>>(64-k)))&M
def xo(seed):
    g=splitmix(seed); s=[next(g) for _ in range(4)]
    while True:
        r=(rotl((s[1]*5)&M,7)*9)&M
        t=(s[1]<<17)&M
        s[2]^=s[0]; s[3]^=s[1]; s[1]^=s[2]; s[0]^=s[3]; s[2]^=t; s[3]=rotl(s[3],45)
        yield r
for seed in (0,42,2**64-1):
    g=xo(seed); v=[next(g) for _ in range(4)]
    print(seed,[hex(x) for x in v], [repr((x>>11)*2.0**-53) for x in v[:2]])
