#if C4 || C5
   free(p1);
#endif

#if C5
   printf(...)
#endif

#if !C5 && C6
   free(p2);
#endif   

#if C5
   printf(...)
   p = malloc(...)
#endif
