//! Gauss-Legendre nodes and weights on [-1, 1] (positive half, ascending).

pub(crate) const GL16_NODES: [f64; 8] = [
    0.095012509837637440185,
    0.28160355077925891323,
    0.45801677765722738634,
    0.61787624440264374845,
    0.7554044083550030339,
    0.86563120238783174388,
    0.94457502307323257608,
    0.9894009349916499326,
];

pub(crate) const GL16_WEIGHTS: [f64; 8] = [
    0.18945061045506849629,
    0.18260341504492358887,
    0.16915651939500253819,
    0.14959598881657673208,
    0.12462897125553387205,
    0.09515851168249278481,
    0.062253523938647892863,
    0.027152459411754094852,
];

pub(crate) const GL32_NODES: [f64; 16] = [
    0.048307665687738316235,
    0.14447196158279649349,
    0.23928736225213707454,
    0.33186860228212764978,
    0.42135127613063534536,
    0.50689990893222939002,
    0.58771575724076232904,
    0.66304426693021520098,
    0.73218211874028968039,
    0.79448379596794240696,
    0.84936761373256997013,
    0.89632115576605212397,
    0.93490607593773968917,
    0.96476225558750643077,
    0.9856115115452683354,
    0.99726386184948156354,
];

pub(crate) const GL32_WEIGHTS: [f64; 16] = [
    0.096540088514727800567,
    0.095638720079274859419,
    0.093844399080804565639,
    0.091173878695763884713,
    0.087652093004403811143,
    0.083311924226946755222,
    0.078193895787070306472,
    0.072345794108848506225,
    0.065822222776361846838,
    0.058684093478535547145,
    0.050998059262376176196,
    0.042835898022226680657,
    0.034273862913021433103,
    0.025392065309262059456,
    0.016274394730905670605,
    0.0070186100094700966004,
];
