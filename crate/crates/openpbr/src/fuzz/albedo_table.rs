//! Slab reflectance of unit-tint fuzz, rows indexed by roughness and
//! columns by view cosine (floor 0.02), isotonically smoothed along each
//! row. Generated by the `regenerate_fuzz_table` example; do not edit.

pub const FUZZ_ALBEDO_TABLE: [[f64; 32]; 32] = [
    [0.979311, 0.969146, 0.939103, 0.911795, 0.885627, 0.860933, 0.837987, 0.816227, 0.794498, 0.775465, 0.756333, 0.737913, 0.722177, 0.703668, 0.688348, 0.674552, 0.659243, 0.644405, 0.632918, 0.620558, 0.607913, 0.596803, 0.584452, 0.574808, 0.563640, 0.553680, 0.543775, 0.534268, 0.525717, 0.516787, 0.508068, 0.500348],
    [0.963755, 0.947233, 0.916773, 0.893077, 0.871717, 0.851883, 0.831840, 0.811318, 0.793158, 0.773710, 0.754922, 0.737420, 0.720335, 0.703438, 0.687935, 0.674275, 0.658828, 0.644508, 0.632332, 0.618968, 0.607613, 0.596555, 0.584080, 0.572203, 0.561482, 0.552723, 0.542967, 0.533077, 0.524790, 0.515095, 0.508740, 0.499053],
    [0.969443, 0.953347, 0.917670, 0.890078, 0.866117, 0.844988, 0.826123, 0.806483, 0.788608, 0.770267, 0.752535, 0.735285, 0.719182, 0.702948, 0.687632, 0.672520, 0.657237, 0.644052, 0.629928, 0.617782, 0.605312, 0.594162, 0.582238, 0.571142, 0.562002, 0.550813, 0.541723, 0.532607, 0.523420, 0.514645, 0.506718, 0.498093],
    [0.973168, 0.958378, 0.924170, 0.893930, 0.868943, 0.846347, 0.825383, 0.805080, 0.785375, 0.766643, 0.749548, 0.732600, 0.715803, 0.700098, 0.685178, 0.670062, 0.655622, 0.641905, 0.628985, 0.615633, 0.603378, 0.592598, 0.580850, 0.569877, 0.559747, 0.548895, 0.539253, 0.529943, 0.520563, 0.512873, 0.502827, 0.494212],
    [0.975490, 0.962095, 0.928583, 0.899718, 0.873403, 0.849213, 0.827243, 0.806010, 0.785660, 0.768075, 0.748508, 0.730407, 0.715007, 0.698547, 0.683123, 0.667887, 0.653933, 0.640363, 0.626648, 0.612268, 0.601832, 0.589370, 0.578117, 0.566690, 0.555992, 0.546512, 0.536088, 0.527370, 0.518497, 0.508570, 0.500602, 0.493253],
    [0.977330, 0.964272, 0.932547, 0.903917, 0.878007, 0.853215, 0.830690, 0.808607, 0.788307, 0.768423, 0.748202, 0.731017, 0.712527, 0.696822, 0.680115, 0.666038, 0.650402, 0.636913, 0.623297, 0.610720, 0.596952, 0.585883, 0.574337, 0.563570, 0.553218, 0.541862, 0.532308, 0.523460, 0.515248, 0.506992, 0.497225, 0.489082],
    [0.978117, 0.965782, 0.936025, 0.908090, 0.881773, 0.858183, 0.834392, 0.811575, 0.790470, 0.769508, 0.750680, 0.729538, 0.712455, 0.694932, 0.678745, 0.663220, 0.648153, 0.634322, 0.620280, 0.607525, 0.593763, 0.582037, 0.570690, 0.559697, 0.548708, 0.540888, 0.529020, 0.519350, 0.511115, 0.502067, 0.492535, 0.485255],
    [0.978677, 0.966830, 0.937410, 0.910705, 0.885017, 0.861593, 0.836932, 0.814355, 0.792602, 0.770408, 0.750222, 0.731217, 0.712727, 0.694580, 0.677778, 0.660090, 0.645412, 0.630783, 0.617962, 0.604133, 0.591055, 0.578623, 0.567018, 0.556515, 0.545572, 0.534895, 0.524922, 0.515698, 0.505537, 0.496968, 0.489255, 0.480968],
    [0.978770, 0.967895, 0.939305, 0.913788, 0.887123, 0.864387, 0.840105, 0.817242, 0.794900, 0.773772, 0.752008, 0.731492, 0.712417, 0.694300, 0.677190, 0.659772, 0.644913, 0.628250, 0.614427, 0.599807, 0.588400, 0.575655, 0.564252, 0.551622, 0.540882, 0.530718, 0.519962, 0.510560, 0.500950, 0.492650, 0.484442, 0.476173],
    [0.979222, 0.968137, 0.940678, 0.914548, 0.889297, 0.865887, 0.843042, 0.819557, 0.796677, 0.775088, 0.753295, 0.732608, 0.713285, 0.692467, 0.675153, 0.658398, 0.641852, 0.627067, 0.612743, 0.597300, 0.584413, 0.571100, 0.559588, 0.547897, 0.536593, 0.526018, 0.515975, 0.507398, 0.496615, 0.488290, 0.479110, 0.470125],
    [0.979412, 0.968508, 0.941902, 0.916542, 0.891727, 0.866560, 0.845020, 0.821635, 0.797827, 0.775842, 0.755312, 0.732607, 0.713147, 0.692985, 0.674517, 0.657092, 0.640140, 0.624860, 0.608565, 0.594152, 0.580182, 0.567518, 0.555863, 0.543145, 0.530452, 0.521120, 0.511240, 0.500947, 0.491272, 0.481138, 0.474303, 0.464500],
    [0.979297, 0.968560, 0.941922, 0.916952, 0.892662, 0.868960, 0.846347, 0.823197, 0.799785, 0.777522, 0.754783, 0.733297, 0.713198, 0.691822, 0.673982, 0.655707, 0.638860, 0.621622, 0.606387, 0.591438, 0.577198, 0.563922, 0.550907, 0.539808, 0.526720, 0.517263, 0.505455, 0.496068, 0.486580, 0.476688, 0.468242, 0.460252],
    [0.979605, 0.968718, 0.941630, 0.917808, 0.893197, 0.870080, 0.847252, 0.823168, 0.800012, 0.778155, 0.755508, 0.733350, 0.713337, 0.692770, 0.673397, 0.653927, 0.635715, 0.619838, 0.603188, 0.590043, 0.574190, 0.560525, 0.547152, 0.535113, 0.522342, 0.512633, 0.501165, 0.490585, 0.482140, 0.471538, 0.461832, 0.454237],
    [0.979133, 0.968202, 0.941635, 0.917743, 0.894073, 0.870993, 0.847442, 0.824853, 0.801702, 0.778468, 0.754977, 0.735448, 0.711522, 0.691530, 0.672102, 0.651843, 0.634785, 0.618137, 0.601010, 0.585903, 0.571473, 0.557253, 0.544258, 0.530932, 0.520020, 0.506995, 0.495665, 0.486530, 0.474587, 0.465522, 0.456808, 0.446947],
    [0.978758, 0.968475, 0.942552, 0.917985, 0.895000, 0.871602, 0.848732, 0.824932, 0.801773, 0.778228, 0.755410, 0.733875, 0.712347, 0.691025, 0.670267, 0.652297, 0.632710, 0.615715, 0.599227, 0.583380, 0.568300, 0.553087, 0.540827, 0.526643, 0.514543, 0.501653, 0.491468, 0.479688, 0.469418, 0.460273, 0.452680, 0.443075],
    [0.978712, 0.968292, 0.942585, 0.917918, 0.895135, 0.871035, 0.848090, 0.825503, 0.801018, 0.777923, 0.755555, 0.732408, 0.711015, 0.690228, 0.670280, 0.649305, 0.630347, 0.613190, 0.596395, 0.579303, 0.565713, 0.548880, 0.536210, 0.522643, 0.509997, 0.498135, 0.486735, 0.474630, 0.464810, 0.454828, 0.445697, 0.436698],
    [0.978033, 0.967443, 0.941428, 0.917735, 0.894845, 0.870692, 0.848583, 0.825370, 0.801313, 0.778428, 0.755155, 0.732028, 0.711492, 0.689530, 0.667222, 0.647832, 0.628050, 0.611208, 0.592338, 0.576740, 0.559763, 0.546488, 0.532172, 0.517680, 0.505732, 0.493205, 0.480588, 0.469855, 0.459553, 0.449182, 0.439002, 0.430490],
    [0.978075, 0.967535, 0.940935, 0.917647, 0.893980, 0.871735, 0.847825, 0.825575, 0.801263, 0.778323, 0.754440, 0.731165, 0.708852, 0.687308, 0.666220, 0.646268, 0.625822, 0.607703, 0.590730, 0.573415, 0.557755, 0.543087, 0.526805, 0.513800, 0.501093, 0.489392, 0.475577, 0.464822, 0.454733, 0.443960, 0.432877, 0.423898],
    [0.977405, 0.967065, 0.941005, 0.916425, 0.894302, 0.870882, 0.847610, 0.825190, 0.801640, 0.776587, 0.752860, 0.729428, 0.707608, 0.685993, 0.664470, 0.643582, 0.623965, 0.605330, 0.587937, 0.570303, 0.554520, 0.538533, 0.523723, 0.509863, 0.495962, 0.483037, 0.470560, 0.458347, 0.449700, 0.438487, 0.427078, 0.419313],
    [0.977385, 0.966885, 0.940602, 0.916478, 0.893542, 0.869875, 0.846263, 0.822618, 0.799403, 0.776085, 0.751762, 0.728753, 0.704640, 0.682975, 0.662465, 0.641520, 0.620908, 0.603570, 0.584980, 0.565905, 0.550678, 0.535927, 0.519897, 0.505113, 0.491478, 0.478443, 0.466632, 0.454738, 0.443355, 0.433447, 0.422775, 0.413062],
    [0.977125, 0.965970, 0.939962, 0.915768, 0.893088, 0.869722, 0.846533, 0.824065, 0.799128, 0.775208, 0.751550, 0.727028, 0.704140, 0.681627, 0.659548, 0.639480, 0.619048, 0.598988, 0.581278, 0.563173, 0.548448, 0.530683, 0.515848, 0.501555, 0.487523, 0.473362, 0.461887, 0.449428, 0.437217, 0.427747, 0.417508, 0.406275],
    [0.976883, 0.965853, 0.939193, 0.915283, 0.892682, 0.869887, 0.847068, 0.822275, 0.798608, 0.773905, 0.750507, 0.725678, 0.702977, 0.680598, 0.658165, 0.636795, 0.616802, 0.597313, 0.579338, 0.560288, 0.543567, 0.526162, 0.512650, 0.495323, 0.482785, 0.468372, 0.457072, 0.443397, 0.433473, 0.422208, 0.410560, 0.400837],
    [0.976752, 0.965163, 0.938522, 0.914862, 0.891455, 0.868502, 0.845008, 0.820912, 0.796320, 0.772788, 0.748527, 0.724898, 0.701778, 0.677058, 0.655248, 0.634258, 0.613820, 0.593717, 0.574153, 0.557448, 0.540238, 0.523100, 0.508255, 0.491972, 0.478035, 0.464917, 0.452120, 0.439987, 0.427558, 0.416200, 0.406097, 0.394982],
    [0.975992, 0.965055, 0.938318, 0.913422, 0.890775, 0.867733, 0.844272, 0.819587, 0.796600, 0.772090, 0.747760, 0.723455, 0.698968, 0.675187, 0.654063, 0.632522, 0.610608, 0.592767, 0.572535, 0.554597, 0.536090, 0.518957, 0.504332, 0.488350, 0.474408, 0.459890, 0.446353, 0.434422, 0.422127, 0.410082, 0.400268, 0.389863],
    [0.975785, 0.964542, 0.937640, 0.912963, 0.890288, 0.866992, 0.842843, 0.819722, 0.794502, 0.770643, 0.745345, 0.721065, 0.697117, 0.674482, 0.650585, 0.630290, 0.608050, 0.588898, 0.568995, 0.549247, 0.532835, 0.516102, 0.499108, 0.484937, 0.468930, 0.455133, 0.441955, 0.429433, 0.416938, 0.405523, 0.394567, 0.383678],
    [0.975567, 0.963847, 0.936982, 0.912372, 0.889183, 0.865470, 0.843542, 0.816918, 0.793830, 0.768928, 0.744887, 0.719358, 0.694193, 0.671592, 0.649333, 0.626912, 0.605957, 0.584708, 0.567198, 0.546485, 0.530300, 0.511845, 0.495658, 0.479898, 0.464535, 0.449935, 0.437327, 0.426478, 0.412535, 0.400447, 0.388515, 0.378483],
    [0.975028, 0.963190, 0.936328, 0.912070, 0.888950, 0.865772, 0.841442, 0.817628, 0.791982, 0.768158, 0.743002, 0.717553, 0.693610, 0.670622, 0.647507, 0.623538, 0.603007, 0.581620, 0.562968, 0.544148, 0.524920, 0.507448, 0.490780, 0.475620, 0.460108, 0.446025, 0.433383, 0.419988, 0.407217, 0.395342, 0.382835, 0.373453],
    [0.974732, 0.963362, 0.935772, 0.911165, 0.887608, 0.863840, 0.839988, 0.815142, 0.791993, 0.766238, 0.740170, 0.716300, 0.692395, 0.667492, 0.643583, 0.621582, 0.600450, 0.578755, 0.559568, 0.539903, 0.521383, 0.503602, 0.486888, 0.471670, 0.455835, 0.442110, 0.428048, 0.414608, 0.401153, 0.391197, 0.378405, 0.367605],
    [0.974180, 0.962300, 0.935380, 0.910653, 0.886682, 0.863605, 0.839018, 0.814132, 0.790295, 0.765190, 0.738502, 0.713753, 0.688823, 0.665235, 0.641008, 0.618982, 0.597720, 0.576412, 0.556157, 0.535665, 0.518733, 0.500570, 0.482727, 0.466325, 0.450915, 0.436395, 0.423550, 0.409350, 0.396330, 0.384652, 0.373148, 0.362500],
    [0.974045, 0.962143, 0.934817, 0.909757, 0.886487, 0.861688, 0.837203, 0.813057, 0.788608, 0.763458, 0.737167, 0.712558, 0.686900, 0.661700, 0.639162, 0.616055, 0.593743, 0.572013, 0.553423, 0.532695, 0.514590, 0.496327, 0.478820, 0.463195, 0.447842, 0.432680, 0.417083, 0.404362, 0.392283, 0.379512, 0.368897, 0.355978],
    [0.973637, 0.962235, 0.934377, 0.909285, 0.884702, 0.860778, 0.836648, 0.811610, 0.787662, 0.761603, 0.735805, 0.710890, 0.683510, 0.659937, 0.634543, 0.613768, 0.590965, 0.568660, 0.548742, 0.529253, 0.510122, 0.492200, 0.475018, 0.459350, 0.444425, 0.428737, 0.412713, 0.400625, 0.386882, 0.374602, 0.362710, 0.350570],
    [0.973088, 0.960913, 0.933567, 0.907833, 0.884758, 0.860502, 0.835263, 0.811173, 0.785765, 0.759347, 0.733240, 0.708300, 0.682768, 0.658055, 0.633660, 0.611157, 0.588393, 0.565815, 0.545280, 0.526337, 0.507153, 0.487957, 0.470057, 0.454448, 0.437838, 0.423760, 0.408037, 0.395403, 0.381907, 0.368888, 0.357248, 0.346548],
];
